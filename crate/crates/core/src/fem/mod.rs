//! Taylor–Hood (P2 velocity, P1 pressure) discretization of the
//! incompressible Navier–Stokes equations on a moving mesh.

mod assemble;
pub mod basis;
mod convergence;
mod dofmap;
pub mod quadrature;
mod solve;

pub use assemble::{assemble, Assembly, FluidParams, FullSystem, SystemBlocks, TimeScheme};
pub use convergence::{convergence_study, l2_errors, ConvergenceReport, ManufacturedSolution, Order};
pub use dofmap::{DofMap, NeumannEdge, NodeClass};
pub use solve::{
    boundary_values, eliminate, solve_saddle_point, FlowSolution, PressureGauge, SingularCause,
};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("non-finite entry in assembled system near cell {0}")]
    NonFinite(usize),
    #[error("singular system: {0}")]
    Singular(SingularCause),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0}")]
    Precondition(String),
}

/// Evaluates a P2 velocity field at barycentric coordinates `l` of `cell`.
pub fn eval_velocity(dofmap: &DofMap, u: &[f64], cell: usize, l: [f64; 3]) -> crate::geom::Point {
    let n = basis::p2_values(l);
    let nodes = dofmap.cell_nodes(cell);
    let mut v = [0.0; 2];
    for k in 0..6 {
        v[0] += n[k] * u[2 * nodes[k]];
        v[1] += n[k] * u[2 * nodes[k] + 1];
    }
    v
}

/// Evaluates a P1 field given at vertices.
pub fn eval_p1(mesh: &crate::mesh::Mesh, p: &[f64], cell: usize, l: [f64; 3]) -> f64 {
    let c = mesh.cells()[cell];
    l[0] * p[c[0]] + l[1] * p[c[1]] + l[2] * p[c[2]]
}
