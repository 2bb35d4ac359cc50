use super::quadrature::triangle_degree6;
use super::{assemble, boundary_values, eval_p1, eval_velocity, solve_saddle_point};
use super::{Assembly, DofMap, FemError, FlowSolution, PressureGauge};
use crate::geom::Point;
use crate::mesh::Mesh;

/// Errors below this are reported as reproduced exactly.
const EXACT_THRESHOLD: f64 = 1e-9;

/// Exact Stokes solution with the matching volume force.
pub struct ManufacturedSolution {
    pub mu: f64,
    pub velocity: Box<dyn Fn(Point) -> Point + Sync>,
    pub pressure: Box<dyn Fn(Point) -> f64 + Sync>,
    pub force: Box<dyn Fn(Point) -> Point + Sync>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order {
    Observed(f64),
    /// Errors at solver precision on the finest meshes.
    Exact,
}

impl Order {
    pub fn at_least(self, rate: f64) -> bool {
        match self {
            Order::Exact => true,
            Order::Observed(r) => r >= rate,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    /// Largest edge length of each mesh.
    pub h: Vec<f64>,
    pub velocity_errors: Vec<f64>,
    pub pressure_errors: Vec<f64>,
    pub velocity_order: Order,
    pub pressure_order: Order,
}

/// L2 errors of velocity and of pressure, the latter up to a constant.
pub fn l2_errors(
    mesh: &Mesh,
    dofmap: &DofMap,
    solution: &FlowSolution,
    velocity: &dyn Fn(Point) -> Point,
    pressure: &dyn Fn(Point) -> f64,
) -> (f64, f64) {
    let rule = triangle_degree6();
    let (mut eu, mut dp, mut dp2, mut area) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        let a = mesh.cell_area(c);
        for &(l, w) in &rule {
            let x = [
                l[0] * pts[0][0] + l[1] * pts[1][0] + l[2] * pts[2][0],
                l[0] * pts[0][1] + l[1] * pts[1][1] + l[2] * pts[2][1],
            ];
            let uh = eval_velocity(dofmap, &solution.u, c, l);
            let ue = velocity(x);
            eu += w * a * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
            let d = eval_p1(mesh, &solution.p, c, l) - pressure(x);
            dp += w * a * d;
            dp2 += w * a * d * d;
            area += w * a;
        }
    }
    let mean = dp / area;
    (eu.sqrt(), (dp2 - mean * mean * area).max(0.0).sqrt())
}

fn order(h: &[f64], e: &[f64]) -> Order {
    let n = e.len();
    if e[n - 1] < EXACT_THRESHOLD && e[n - 2] < EXACT_THRESHOLD {
        Order::Exact
    } else {
        Order::Observed((e[n - 2] / e[n - 1]).ln() / (h[n - 2] / h[n - 1]).ln())
    }
}

/// Solves the manufactured problem with exact Dirichlet data on each mesh
/// and reports errors and the observed orders between the two finest meshes.
pub fn convergence_study(exact: &ManufacturedSolution, meshes: &[Mesh]) -> Result<ConvergenceReport, FemError> {
    if meshes.len() < 3 {
        return Err(FemError::Precondition(format!("convergence study needs at least 3 meshes, got {}", meshes.len())));
    }
    let mut report = ConvergenceReport {
        h: Vec::new(),
        velocity_errors: Vec::new(),
        pressure_errors: Vec::new(),
        velocity_order: Order::Exact,
        pressure_order: Order::Exact,
    };
    for mesh in meshes {
        let dofmap = DofMap::new(mesh);
        let input = Assembly { force: &*exact.force, ..Assembly::stokes(exact.mu) };
        let system = assemble(mesh, &dofmap, &input)?;
        let bc = boundary_values(&dofmap, &|_, x| (exact.velocity)(x), &|_, x| (exact.velocity)(x));
        let sol = solve_saddle_point(mesh, &dofmap, &system, &bc, PressureGauge::Auto)?;
        let (eu, ep) = l2_errors(mesh, &dofmap, &sol, &*exact.velocity, &*exact.pressure);
        report.h.push(mesh.max_edge_length());
        report.velocity_errors.push(eu);
        report.pressure_errors.push(ep);
    }
    report.velocity_order = order(&report.h, &report.velocity_errors);
    report.pressure_order = order(&report.h, &report.pressure_errors);
    Ok(report)
}
