use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DofMap, FemError, FullSystem, NodeClass};
use crate::geom::Point;
use crate::linalg::{self, CsrMatrix};
use crate::mesh::Mesh;

/// Relative residual accepted from the direct solver.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PressureGauge {
    /// Fix the first pressure dof to zero when no traction boundary exists.
    #[default]
    Auto,
    /// Never fix a pressure dof.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularCause {
    NoPressureGauge,
    DisconnectedMesh,
    Unknown,
}

impl fmt::Display for SingularCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingularCause::NoPressureGauge => "pressure is only determined up to a constant (no pressure gauge)",
            SingularCause::DisconnectedMesh => "mesh has several disconnected components",
            SingularCause::Unknown => "factorization broke down",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSolution {
    /// P2 velocity, two components per node.
    pub u: Vec<f64>,
    /// P1 pressure at vertices.
    pub p: Vec<f64>,
}

impl FlowSolution {
    pub fn zeros(dofmap: &DofMap) -> Self {
        FlowSolution { u: vec![0.0; dofmap.n_velocity()], p: vec![0.0; dofmap.n_pressure()] }
    }
}

/// Replaces fixed dofs by identity rows and moves their columns to the
/// right-hand side, keeping a symmetric matrix symmetric.
pub fn eliminate(matrix: &CsrMatrix, rhs: &[f64], fixed: &[Option<f64>]) -> (CsrMatrix, Vec<f64>) {
    let mut triplets = Vec::with_capacity(matrix.nnz());
    let mut b = rhs.to_vec();
    for r in 0..matrix.nrows {
        if let Some(v) = fixed[r] {
            triplets.push((r, r, 1.0));
            b[r] = v;
            continue;
        }
        for (c, v) in matrix.row(r) {
            match fixed[c] {
                Some(g) => b[r] -= v * g,
                None => triplets.push((r, c, v)),
            }
        }
    }
    (CsrMatrix::from_triplets(matrix.nrows, matrix.ncols, &triplets), b)
}

/// Prescribed velocity at every Dirichlet and body-boundary node; `None`
/// elsewhere. `outer` receives the tag (if any) and position, `body`
/// receives the body index and position.
pub fn boundary_values(
    dofmap: &DofMap,
    outer: &dyn Fn(Option<usize>, Point) -> Point,
    body: &dyn Fn(usize, Point) -> Point,
) -> Vec<Option<Point>> {
    (0..dofmap.n_nodes())
        .map(|n| {
            let x = dofmap.node_coords()[n];
            match dofmap.node_class(n) {
                NodeClass::Dirichlet(tag) => Some(outer(tag, x)),
                NodeClass::Gamma(i) => Some(body(i, x)),
                _ => None,
            }
        })
        .collect()
}

/// Diagnoses structural singularity before factorization.
pub(crate) fn check_gauge(mesh: &Mesh, dofmap: &DofMap, gauge: PressureGauge) -> Result<bool, FemError> {
    let fix = !dofmap.has_neumann();
    if fix && gauge == PressureGauge::None {
        return Err(FemError::Singular(SingularCause::NoPressureGauge));
    }
    if mesh.connected_components() > 1 {
        return Err(FemError::Singular(SingularCause::DisconnectedMesh));
    }
    Ok(fix && gauge == PressureGauge::Auto)
}

/// Solves the velocity–pressure system with the given nodal velocities
/// imposed. Without a traction boundary the pressure at vertex 0 is fixed
/// to zero.
pub fn solve_saddle_point(
    mesh: &Mesh,
    dofmap: &DofMap,
    system: &FullSystem,
    velocity_bc: &[Option<Point>],
    gauge: PressureGauge,
) -> Result<FlowSolution, FemError> {
    if velocity_bc.len() != dofmap.n_nodes() || system.rhs.len() != dofmap.n_total() {
        return Err(FemError::Dimension("boundary values or system do not match the dof map".into()));
    }
    let fix_pressure = check_gauge(mesh, dofmap, gauge)?;
    let mut fixed = vec![None; dofmap.n_total()];
    for (n, v) in velocity_bc.iter().enumerate() {
        if let Some(v) = v {
            fixed[2 * n] = Some(v[0]);
            fixed[2 * n + 1] = Some(v[1]);
        }
    }
    if fix_pressure {
        fixed[dofmap.pressure_dof(0)] = Some(0.0);
    }
    let (a, b) = eliminate(&system.matrix, &system.rhs, &fixed);
    let x = linalg::solve_checked(&a, &b, SOLVER_TOLERANCE).map_err(|e| match e {
        linalg::LinalgError::Factorization(_) | linalg::LinalgError::NonFinite => FemError::Singular(SingularCause::Unknown),
        other => FemError::Linalg(other),
    })?;
    let nv = dofmap.n_velocity();
    Ok(FlowSolution { u: x[..nv].to_vec(), p: x[nv..].to_vec() })
}
