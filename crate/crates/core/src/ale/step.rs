use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{compute_tau, solve_extension, AleError};
use crate::fem::DofMap;
use crate::geom::{self, Point};
use crate::mesh::{quality_report, remesh_with_map, Mesh, RemeshOutput};

/// Reference configuration and the displacement mapping it to the current
/// domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AleState {
    pub reference: Mesh,
    /// Displacement of every reference vertex.
    pub phi: Vec<Point>,
    /// Extension coefficient of each reference cell.
    pub tau: Vec<f64>,
    pub remesh_count: usize,
}

impl AleState {
    pub fn new(reference: Mesh) -> Self {
        let tau = compute_tau(&reference);
        let phi = vec![[0.0, 0.0]; reference.n_vertices()];
        AleState { reference, phi, tau, remesh_count: 0 }
    }

    /// The current domain.
    pub fn current(&self) -> Result<Mesh, AleError> {
        Ok(self.reference.displace(&self.phi)?)
    }
}

/// Outcome of moving the domain over one time step.
#[derive(Clone, Debug)]
pub struct DomainStep {
    /// State whose current mesh is the domain at the end of the step.
    pub state: AleState,
    pub mesh: Mesh,
    /// Mesh velocity on the P2 nodes of `mesh`.
    pub u_ale: Vec<f64>,
    /// Set when the start-of-step mesh was replaced; its `mesh` is the new
    /// start-of-step domain and `vertex_map` relabels old vertices.
    pub remeshed: Option<RemeshOutput>,
    pub min_quality: f64,
}

fn displaced(state: &AleState, targets: &BTreeMap<usize, Point>) -> Result<(Vec<Point>, Mesh), AleError> {
    let boundary: BTreeMap<usize, Point> =
        targets.iter().map(|(&v, &x)| (v, geom::sub(x, state.reference.vertices()[v]))).collect();
    let phi = solve_extension(&state.reference, &state.tau, &boundary)?;
    let mut mesh = state.reference.clone();
    mesh.set_vertices_unchecked(state.reference.vertices().iter().zip(&phi).map(|(&x, &d)| geom::add(x, d)).collect());
    Ok((phi, mesh))
}

fn mesh_velocity(start: &Mesh, end: &Mesh, dt: f64) -> Vec<f64> {
    let dofmap = DofMap::new(end);
    let nv = end.n_vertices();
    let vel: Vec<Point> =
        start.vertices().iter().zip(end.vertices()).map(|(&a, &b)| geom::scale(geom::sub(b, a), 1.0 / dt)).collect();
    let mut u = Vec::with_capacity(dofmap.n_velocity());
    for v in &vel {
        u.extend(v);
    }
    for e in &dofmap.topology().edges {
        u.extend(geom::midpoint(vel[e[0]], vel[e[1]]));
    }
    debug_assert_eq!(u.len(), 2 * (nv + dofmap.topology().edges.len()));
    u
}

/// Moves the domain so that body boundary vertices reach `targets` (absolute
/// positions keyed by current vertex index).
///
/// The interior follows the extension problem on the reference mesh. If
/// the result would invert a cell or drop below `quality_threshold`, the
/// start-of-step mesh is remeshed, becomes the new reference, and the
/// extension is solved again from it.
pub fn step_domain(
    state: &AleState,
    current: &Mesh,
    targets: &BTreeMap<usize, Point>,
    dt: f64,
    quality_threshold: f64,
) -> Result<DomainStep, AleError> {
    if !(dt > 0.0) {
        return Err(AleError::TimeStep(dt));
    }
    let (phi, tentative) = displaced(state, targets)?;
    let q = quality_report(&tentative).min_quality;
    if tentative.first_inverted().is_none() && q >= quality_threshold {
        let u_ale = mesh_velocity(current, &tentative, dt);
        let next = AleState { phi, ..state.clone() };
        return Ok(DomainStep { state: next, mesh: tentative, u_ale, remeshed: None, min_quality: q });
    }
    log::debug!("predicted min quality {q:.3} below {quality_threshold}; remeshing");
    let out = remesh_with_map(current)?;
    let mut rebased = AleState::new(out.mesh.clone());
    rebased.remesh_count = state.remesh_count + 1;
    let mapped: BTreeMap<usize, Point> =
        targets.iter().map(|(&v, &x)| (out.vertex_map[v].expect("body vertices survive remeshing"), x)).collect();
    let (phi, tentative) = displaced(&rebased, &mapped)?;
    if let Some((cell, area)) = tentative.first_inverted() {
        return Err(AleError::InvertedAfterRemesh { cell, area });
    }
    let q = quality_report(&tentative).min_quality;
    if q < quality_threshold {
        log::warn!("min quality {q:.3} stays below {quality_threshold} after remeshing");
    }
    let u_ale = mesh_velocity(&out.mesh, &tentative, dt);
    rebased.phi = phi;
    Ok(DomainStep { state: rebased, mesh: tentative, u_ale, remeshed: Some(out), min_quality: q })
}
