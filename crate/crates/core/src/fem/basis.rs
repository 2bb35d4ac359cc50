//! Quadratic Lagrange basis on triangles. Local node order: the three
//! vertices, then the midpoints of edges 01, 12, 20.

use crate::geom::Point;

/// Gradients of the barycentric coordinates of triangle `p`.
pub fn barycentric_gradients(p: &[Point; 3]) -> [Point; 3] {
    let [a, b, c] = *p;
    let two_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    [
        [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
        [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
        [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
    ]
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

pub fn p2_gradients(l: [f64; 3], g: &[Point; 3]) -> [Point; 6] {
    let lin = |c: [f64; 3]| {
        [c[0] * g[0][0] + c[1] * g[1][0] + c[2] * g[2][0], c[0] * g[0][1] + c[1] * g[1][1] + c[2] * g[2][1]]
    };
    [
        lin([4.0 * l[0] - 1.0, 0.0, 0.0]),
        lin([0.0, 4.0 * l[1] - 1.0, 0.0]),
        lin([0.0, 0.0, 4.0 * l[2] - 1.0]),
        lin([4.0 * l[1], 4.0 * l[0], 0.0]),
        lin([0.0, 4.0 * l[2], 4.0 * l[1]]),
        lin([4.0 * l[2], 0.0, 4.0 * l[0]]),
    ]
}

/// Barycentric coordinates of the six local nodes.
pub const P2_NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];
