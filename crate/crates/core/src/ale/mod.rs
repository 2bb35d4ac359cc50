//! Arbitrary Lagrangian–Eulerian mesh motion: harmonic extension of body
//! boundary displacements, mesh velocity, quality gating and remeshing with
//! field transfer.

mod extension;
mod step;
mod tau;
mod transfer;

pub use extension::solve_extension;
pub use step::{step_domain, AleState, DomainStep};
pub use tau::compute_tau;
pub use transfer::{transfer_p1, transfer_p2};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::mesh::MeshError;

/// Default minimum cell quality before a remesh is triggered.
pub const DEFAULT_QUALITY_THRESHOLD: f64 = 0.2;

#[derive(Debug, Error)]
pub enum AleError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("extension problem is singular: mesh has {0} components")]
    Singular(usize),
    #[error("no displacement given for body boundary vertex {0}")]
    MissingBoundary(usize),
    #[error("cell {cell} inverted (area {area:.3e}) even after remeshing")]
    InvertedAfterRemesh { cell: usize, area: f64 },
    #[error("point ({0:.6}, {1:.6}) lies outside the source mesh")]
    Transfer(f64, f64),
    #[error("time step must be positive, got {0}")]
    TimeStep(f64),
}
