use super::{build_projection, Body, Projection, RigidBodyError};
use crate::fem::{eliminate, DofMap, FemError, FlowSolution, FullSystem, NodeClass, PressureGauge, SingularCause};
use crate::geom::Point;
use crate::linalg::{self, CsrMatrix, LinalgError};
use crate::mesh::Mesh;

/// Relative residual accepted for the coupled solve.
const TOLERANCE: f64 = 1e-10;

/// Data for one monolithic fluid–body solve.
pub struct CoupledInput<'a> {
    /// Fluid system assembled on the current mesh.
    pub system: &'a FullSystem,
    /// Bodies with positions of the current iterate and velocities of the
    /// previous time step.
    pub bodies: &'a [Body],
    /// Lab-frame deformation (or slip) velocity at every velocity node;
    /// only body-boundary entries are used.
    pub trace: &'a [Point],
    /// Prescribed velocity at outer Dirichlet nodes.
    pub outer: &'a [Option<Point>],
    /// External force and counter-clockwise torque on each body.
    pub external: &'a [(Point, f64)],
    /// Time step of the body inertia rows; `None` drops body inertia.
    pub dt: Option<f64>,
    pub gauge: PressureGauge,
}

/// The system in rigid-body unknowns with outer boundary values eliminated.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub projection: Projection,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Full-layout vector added to the projected solution (the gait trace).
    pub offset: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CoupledSolution {
    pub flow: FlowSolution,
    pub ell: Vec<Point>,
    pub omega: Vec<f64>,
}

pub fn assemble_coupled(mesh: &Mesh, dofmap: &DofMap, input: &CoupledInput) -> Result<ReducedSystem, RigidBodyError> {
    let nvel = dofmap.n_velocity();
    let nb = input.bodies.len();
    if input.system.rhs.len() != dofmap.n_total()
        || input.trace.len() != dofmap.n_nodes()
        || input.outer.len() != dofmap.n_nodes()
        || input.external.len() != nb
    {
        return Err(RigidBodyError::Dimension("coupled input does not match the dof map".into()));
    }
    let fix_pressure = !dofmap.has_neumann();
    if fix_pressure && input.gauge == PressureGauge::None {
        return Err(FemError::Singular(SingularCause::NoPressureGauge).into());
    }
    if mesh.connected_components() > 1 {
        return Err(FemError::Singular(SingularCause::DisconnectedMesh).into());
    }
    let projection = build_projection(dofmap, input.bodies)?;
    let p = &projection.matrix;
    let full = |i: usize| if i < nvel { i } else { i + 3 * nb };

    // Trace of the gait on body-boundary dofs, in fluid layout.
    let mut offset_fluid = vec![0.0; dofmap.n_total()];
    for node in 0..dofmap.n_nodes() {
        if let NodeClass::Gamma(_) = dofmap.node_class(node) {
            offset_fluid[2 * node] = input.trace[node][0];
            offset_fluid[2 * node + 1] = input.trace[node][1];
        }
    }
    let k = &input.system.matrix;
    let k_offset = k.mul_vec(&offset_fluid);

    let mut triplets = Vec::with_capacity(k.nnz() + 3 * nb);
    let mut rhs = vec![0.0; projection.n_reduced()];
    for i in 0..k.nrows {
        let prow: Vec<(usize, f64)> = p.row(full(i)).collect();
        for (j, v) in k.row(i) {
            for (c, b) in p.row(full(j)) {
                for &(r, a) in &prow {
                    triplets.push((r, c, a * v * b));
                }
            }
        }
        let g = input.system.rhs[i] - k_offset[i];
        for &(r, a) in &prow {
            rhs[r] += a * g;
        }
    }
    for (b, body) in input.bodies.iter().enumerate() {
        let (force, torque) = input.external[b];
        let (m, inertia) = match input.dt {
            Some(dt) => (body.mass / dt, body.inertia / dt),
            None => (0.0, 0.0),
        };
        let idx = |k: usize| projection.reduced_body_index(b, k);
        for (k, coef) in [m, m, inertia].into_iter().enumerate() {
            triplets.push((idx(k), idx(k), coef));
        }
        rhs[idx(0)] += force[0] + m * body.ell[0];
        rhs[idx(1)] += force[1] + m * body.ell[1];
        rhs[idx(2)] += torque + inertia * body.omega;
    }
    let n = projection.n_reduced();
    let matrix = CsrMatrix::from_triplets(n, n, &triplets);

    let mut fixed = vec![None; n];
    for (node, v) in input.outer.iter().enumerate() {
        if let (Some(v), NodeClass::Dirichlet(_)) = (v, dofmap.node_class(node)) {
            fixed[projection.reduced_index[2 * node].unwrap()] = Some(v[0]);
            fixed[projection.reduced_index[2 * node + 1].unwrap()] = Some(v[1]);
        }
    }
    if fix_pressure && input.gauge == PressureGauge::Auto {
        fixed[projection.reduced_index[full(dofmap.pressure_dof(0))].unwrap()] = Some(0.0);
    }
    let (matrix, rhs) = eliminate(&matrix, &rhs, &fixed);
    let mut offset = vec![0.0; projection.n_full()];
    offset[..nvel].copy_from_slice(&offset_fluid[..nvel]);
    Ok(ReducedSystem { projection, matrix, rhs, offset })
}

/// Solves the coupled system for velocity, pressure and body velocities.
pub fn solve_coupled(mesh: &Mesh, dofmap: &DofMap, input: &CoupledInput) -> Result<CoupledSolution, RigidBodyError> {
    let reduced = assemble_coupled(mesh, dofmap, input)?;
    let x = linalg::solve_checked(&reduced.matrix, &reduced.rhs, TOLERANCE).map_err(|e| match e {
        LinalgError::Factorization(_) | LinalgError::NonFinite => {
            RigidBodyError::Fem(FemError::Singular(SingularCause::Unknown))
        }
        other => other.into(),
    })?;
    let mut full = reduced.projection.matrix.mul_vec(&x);
    for (f, o) in full.iter_mut().zip(&reduced.offset) {
        *f += o;
    }
    let nvel = dofmap.n_velocity();
    let nb = input.bodies.len();
    let ell = (0..nb).map(|b| [full[nvel + 3 * b], full[nvel + 3 * b + 1]]).collect();
    let omega = (0..nb).map(|b| full[nvel + 3 * b + 2]).collect();
    Ok(CoupledSolution {
        flow: FlowSolution { u: full[..nvel].to_vec(), p: full[nvel + 3 * nb..].to_vec() },
        ell,
        omega,
    })
}
