mod common;

use std::f64::consts::PI;

use swimale::fem::{assemble, boundary_values, Assembly, DofMap, NodeClass, PressureGauge};
use swimale::gaits::Gait;
use swimale::geom::{self, Point};
use swimale::mesh::Mesh;
use swimale::rigid_body::{build_projection, solve_coupled, Body, CoupledInput, CoupledSolution};

use common::{annulus, body_from_mesh, cholesky};

fn solve(mesh: &Mesh, body: &Body, trace: &dyn Fn(Point) -> Point, load: (Point, f64)) -> (DofMap, CoupledSolution) {
    let d = DofMap::new(mesh);
    let system = assemble(mesh, &d, &Assembly::stokes(1.0)).unwrap();
    let trace: Vec<Point> = d.node_coords().iter().map(|&x| trace(x)).collect();
    let outer = boundary_values(&d, &|_, _| [0.0, 0.0], &|_, _| [0.0, 0.0]);
    let input = CoupledInput {
        system: &system,
        bodies: std::slice::from_ref(body),
        trace: &trace,
        outer: &outer,
        external: &[load],
        dt: None,
        gauge: PressureGauge::Auto,
    };
    let sol = solve_coupled(mesh, &d, &input).unwrap();
    (d, sol)
}

fn gamma_nodes(d: &DofMap) -> Vec<usize> {
    (0..d.n_nodes()).filter(|&n| d.node_class(n) == NodeClass::Gamma(0)).collect()
}

#[test]
fn projection_maps_rigid_motions_onto_boundary_dofs() {
    let m = annulus(0.3, 1.0, 16, 3);
    let body = body_from_mesh(&m, 0, [0.0, 0.0], Gait::Passive);
    let d = DofMap::new(&m);
    let p = build_projection(&d, std::slice::from_ref(&body)).unwrap();
    let mut q = vec![0.0; p.n_reduced()];
    q[p.reduced_body_index(0, 0)] = 1.0;
    let u = p.matrix.mul_vec(&q);
    for n in gamma_nodes(&d) {
        assert_eq!([u[2 * n], u[2 * n + 1]], [1.0, 0.0]);
    }
    let mut q = vec![0.0; p.n_reduced()];
    q[p.reduced_body_index(0, 2)] = 1.0;
    let u = p.matrix.mul_vec(&q);
    let n = gamma_nodes(&d).into_iter().find(|&n| geom::dist(d.node_coords()[n], [0.3, 0.0]) < 1e-14).unwrap();
    assert!(u[2 * n].abs() < 1e-15 && (u[2 * n + 1] - 0.3).abs() < 1e-15);
    // Body unknowns themselves are carried through.
    assert_eq!(u[p.full_body_index(0, 2)], 1.0);
}

#[test]
fn projection_normal_matrix_is_positive_definite() {
    let m = annulus(0.3, 1.0, 8, 2);
    let body = body_from_mesh(&m, 0, [0.0, 0.0], Gait::Passive);
    let d = DofMap::new(&m);
    let p = build_projection(&d, &[body]).unwrap();
    let dense = p.matrix.to_dense();
    let n = p.n_reduced();
    let ptp: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dense.iter().map(|row| row[i] * row[j]).sum()).collect())
        .collect();
    assert!(cholesky(&ptp).is_some());
}

#[test]
fn body_at_rest_stays_at_rest() {
    let m = annulus(0.5, 2.0, 32, 8);
    let body = body_from_mesh(&m, 0, [0.0, 0.0], Gait::Passive);
    let (_, sol) = solve(&m, &body, &|_| [0.0, 0.0], ([0.0, 0.0], 0.0));
    assert_eq!(sol.ell[0], [0.0, 0.0]);
    assert_eq!(sol.omega[0], 0.0);
    assert!(sol.flow.u.iter().all(|&v| v == 0.0));
}

#[test]
fn rigid_rotation_trace_is_absorbed_by_the_body() {
    let m = annulus(0.5, 2.0, 32, 8);
    let body = body_from_mesh(&m, 0, [0.0, 0.0], Gait::Passive);
    let w0 = 0.8;
    let (d, sol) = solve(&m, &body, &|x| geom::scale(geom::perp(x), w0), ([0.0, 0.0], 0.0));
    assert!((sol.omega[0] + w0).abs() < 1e-8, "omega {}", sol.omega[0]);
    assert!(geom::norm(sol.ell[0]) < 1e-8);
    // Constraint u = ℓ + ω r^⊥ + trace holds on the boundary, and the fluid
    // is left at rest.
    for n in gamma_nodes(&d) {
        let x = d.node_coords()[n];
        let u = DofMap::node_velocity(&sol.flow.u, n);
        let r = geom::add(geom::add(sol.ell[0], geom::scale(geom::perp(x), sol.omega[0])), geom::scale(geom::perp(x), w0));
        assert!(geom::dist(u, r) < 1e-8);
    }
    assert!(sol.flow.u.iter().all(|v| v.abs() < 1e-8));
}

/// Drag coefficient of a cylinder of radius `a` translating inside a fixed
/// concentric cylinder of radius `b`: F = 4πμU / (ln(b/a) − (b²−a²)/(b²+a²)).
fn annulus_mobility(a: f64, b: f64) -> f64 {
    ((b / a).ln() - (b * b - a * a) / (b * b + a * a)) / (4.0 * PI)
}

#[test]
fn falling_disk_matches_concentric_cylinder_drag() {
    let (a, b) = (0.5, 2.0);
    let m = annulus(a, b, 64, 16);
    let body = body_from_mesh(&m, 0, [0.0, 0.0], Gait::Passive);
    let (_, sol) = solve(&m, &body, &|_| [0.0, 0.0], ([0.0, -1.0], 0.0));
    let [lx, ly] = sol.ell[0];
    assert!(lx.abs() / ly.abs() < 1e-6, "lateral {lx} vs {ly}");
    assert!(sol.omega[0].abs() < 1e-6 * ly.abs());
    let expect = -annulus_mobility(a, b);
    assert!((ly - expect).abs() / expect.abs() < 0.02, "{ly} vs {expect}");
}

#[test]
fn torqued_disk_matches_couette_rotation() {
    let (a, b) = (0.5, 2.0);
    let m = annulus(a, b, 64, 16);
    let body = body_from_mesh(&m, 0, [0.0, 0.0], Gait::Passive);
    let (_, sol) = solve(&m, &body, &|_| [0.0, 0.0], ([0.0, 0.0], 1.0));
    // T = 4πμω a²b²/(b² − a²), counter-clockwise.
    let expect = (b * b - a * a) / (4.0 * PI * a * a * b * b);
    assert!((sol.omega[0] - expect).abs() / expect < 0.02, "{} vs {expect}", sol.omega[0]);
    assert!(geom::norm(sol.ell[0]) < 1e-6 * expect);
}

#[test]
fn inertia_does_not_depend_on_orientation() {
    let m = annulus(0.4, 1.0, 24, 2);
    let vertices = m.swimmer_vertices(0);
    let loop0: Vec<Point> = m.swimmer_loops(0)[0].iter().map(|&v| m.vertices()[v]).collect();
    let positions: Vec<Point> = vertices.iter().map(|&v| m.vertices()[v]).collect();
    let rot = |p: &Point| swimale::rigid_body::body_to_lab(1.1, *p);
    let rotated_loop: Vec<Point> = loop0.iter().map(rot).collect();
    let rotated: Vec<Point> = positions.iter().map(rot).collect();
    let x_cm = [0.05, -0.02];
    let a = Body::new(0, 2.0, Gait::Passive, x_cm, 0.0, vertices.clone(), &positions, &[loop0]).unwrap();
    let b = Body::new(0, 2.0, Gait::Passive, rot(&x_cm), 1.1, vertices, &rotated, &[rotated_loop]).unwrap();
    assert!((a.inertia - b.inertia).abs() < 1e-12 * a.inertia);
    assert!((a.mass - b.mass).abs() < 1e-12 * a.mass);
    for (p, q) in a.labels.iter().zip(&b.labels) {
        assert!(geom::dist(*p, *q) < 1e-12);
    }
}
