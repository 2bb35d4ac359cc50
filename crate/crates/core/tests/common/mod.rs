#![allow(dead_code)]

use std::f64::consts::PI;

use swimale::fem::ManufacturedSolution;
use swimale::gaits::Gait;
use swimale::geom::{self, Point};
use swimale::mesh::{BoundaryEdge, BoundaryKind, BoundaryTag, Mesh};
use swimale::rigid_body::Body;

/// Annulus between circles of radius `r_in` (tagged as body 0) and `r_out`
/// (wall) around the origin, built from `n_theta × n_r` quads split through
/// their centers. Radii grow geometrically so cells stay close to square.
/// With even `n_theta` the mesh is mirror symmetric about both axes.
pub fn annulus(r_in: f64, r_out: f64, n_theta: usize, n_r: usize) -> Mesh {
    let mut vertices = Vec::new();
    for i in 0..=n_r {
        let r = r_in * (r_out / r_in).powf(i as f64 / n_r as f64);
        for k in 0..n_theta {
            let a = 2.0 * PI * k as f64 / n_theta as f64;
            vertices.push([r * a.cos(), r * a.sin()]);
        }
    }
    let id = |i: usize, k: usize| i * n_theta + k % n_theta;
    let mut cells = Vec::new();
    for i in 0..n_r {
        for k in 0..n_theta {
            let q = [id(i, k), id(i, k + 1), id(i + 1, k + 1), id(i + 1, k)];
            let c = q.iter().fold([0.0, 0.0], |s, &v| geom::add(s, geom::scale(vertices[v], 0.25)));
            let m = vertices.len();
            vertices.push(c);
            for j in 0..4 {
                let (a, b) = (q[j], q[(j + 1) % 4]);
                if geom::orient(vertices[a], vertices[b], c) > 0.0 {
                    cells.push([a, b, m]);
                } else {
                    cells.push([b, a, m]);
                }
            }
        }
    }
    let mut edges = Vec::new();
    for k in 0..n_theta {
        edges.push(BoundaryEdge { vertices: [id(0, k), id(0, k + 1)], tag: 1 });
        edges.push(BoundaryEdge { vertices: [id(n_r, k), id(n_r, k + 1)], tag: 0 });
    }
    let tags = vec![
        BoundaryTag { name: "wall".into(), kind: BoundaryKind::Wall },
        BoundaryTag { name: "body0".into(), kind: BoundaryKind::Swimmer(0) },
    ];
    Mesh::new(vertices, cells, edges, tags).expect("valid annulus")
}

/// Passive body built from the swimmer tags of a mesh, with its frame at
/// `x_cm`.
pub fn body_from_mesh(mesh: &Mesh, b: usize, x_cm: Point, gait: Gait) -> Body {
    let vertices = mesh.swimmer_vertices(b);
    let positions: Vec<Point> = vertices.iter().map(|&v| mesh.vertices()[v]).collect();
    let loops: Vec<Vec<Point>> =
        mesh.swimmer_loops(b).iter().map(|l| l.iter().map(|&v| mesh.vertices()[v]).collect()).collect();
    Body::new(b, 1.0, gait, x_cm, 0.0, vertices, &positions, &loops).expect("valid body")
}

/// Scenario text for one passive disk in a closed channel under Stokes flow;
/// `body` is appended to the body table.
pub fn disk_scenario(body: &str, t_final: f64, dt: f64) -> String {
    format!(
        r#"
        name = "disk"

        [mesh]
        type = "channel"
        length = 4.0
        height = 2.0
        h = 0.3

        [fluid]
        mu = 1.0

        [[body]]
        h = 0.08
        shape = {{ type = "disk", center = [2.0, 1.0], radius = 0.3 }}
        {body}

        [time]
        t_final = {t_final}
        dt = {dt}

        [output]
        vtu_every = 5
        "#
    )
}

/// Dense Cholesky factorization; `None` if a pivot is not positive.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if !(v > 0.0) {
                    return None;
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Smooth divergence-free Stokes solution on the unit square with no-slip
/// boundary values, its pressure and the matching force (μ = 1).
pub fn manufactured() -> ManufacturedSolution {
    let mu = 1.0;
    ManufacturedSolution {
        mu,
        velocity: Box::new(|[x, y]| {
            [PI * (PI * x).sin().powi(2) * (2.0 * PI * y).sin(), -PI * (2.0 * PI * x).sin() * (PI * y).sin().powi(2)]
        }),
        pressure: Box::new(|[x, y]| (PI * x).cos() * (PI * y).cos()),
        force: Box::new(move |[x, y]| {
            let p3 = PI.powi(3);
            let lap1 = p3 * (2.0 * (2.0 * PI * x).cos() * (2.0 * PI * y).sin() - 4.0 * (PI * x).sin().powi(2) * (2.0 * PI * y).sin());
            let lap2 = -p3 * (2.0 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos() - 4.0 * (2.0 * PI * x).sin() * (PI * y).sin().powi(2));
            [
                -mu * lap1 - PI * (PI * x).sin() * (PI * y).cos(),
                -mu * lap2 - PI * (PI * x).cos() * (PI * y).sin(),
            ]
        }),
    }
}
