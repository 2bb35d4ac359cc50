//! Scenario-driven time stepping: domain motion, collisions, the coupled
//! fluid–body solve and outputs.

pub mod expr;
mod output;
mod run;
pub mod scenario;

pub use output::{write_vtu, CsvWriter, PvdWriter, CSV_HEADER};
pub use run::{load_checkpoint, run, save_checkpoint, Checkpoint, RunOptions, RunSummary};
pub use scenario::{Scenario, ScenarioError};

/// Names of the scenarios shipped with the crate.
pub const BUNDLED: [&str; 6] = [
    "sperm2d",
    "three_sphere_wall",
    "three_sphere_free",
    "squirmer_pair_neutral",
    "squirmer_pair_puller",
    "pulsatile_channel",
];

/// TOML text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    Some(match name {
        "sperm2d" => include_str!("../../scenarios/sperm2d.toml"),
        "three_sphere_wall" => include_str!("../../scenarios/three_sphere_wall.toml"),
        "three_sphere_free" => include_str!("../../scenarios/three_sphere_free.toml"),
        "squirmer_pair_neutral" => include_str!("../../scenarios/squirmer_pair_neutral.toml"),
        "squirmer_pair_puller" => include_str!("../../scenarios/squirmer_pair_puller.toml"),
        "pulsatile_channel" => include_str!("../../scenarios/pulsatile_channel.toml"),
        _ => return None,
    })
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ale::{step_domain, transfer_p2, AleError, AleState};
use crate::collision::{compute_fields, find_contacts, total_external, ContactKind, ContactPair, External};
use crate::fem::{assemble, boundary_values, Assembly, DofMap, FemError, FluidParams, NodeClass, PressureGauge};
use crate::gaits::{Gait, GaitError};
use crate::geom::{self, Point};
use crate::mesh::{Mesh, MeshError, RemeshOutput};
use crate::rigid_body::{body_to_lab, solve_coupled, Body, CoupledInput, CoupledSolution, RigidBodyError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("flow solve: {0}")]
    Fem(#[from] FemError),
    #[error("mesh motion: {0}")]
    Ale(#[from] AleError),
    #[error("coupled solve: {0}")]
    RigidBody(#[from] RigidBodyError),
    #[error("gait: {0}")]
    Gait(#[from] GaitError),
    #[error("bodies interpenetrate at step {step}: {pair:?}")]
    Interpenetration { step: usize, pair: ContactKind },
    #[error("{what} did not converge at step {step} (change {change:.3e})")]
    NotConverged { what: &'static str, step: usize, change: f64 },
    #[error("cannot write {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl SimError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Scenario(_) => 2,
            SimError::Io { .. } | SimError::Checkpoint(_) => 1,
            _ => 3,
        }
    }
}

/// One line of the trajectory file.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub body: usize,
    pub x_cm: Point,
    pub theta: f64,
    pub ell: Point,
    pub omega: f64,
    /// Collision force.
    pub force: Point,
    /// Collision torque `−(X − x_CM) × F`.
    pub torque: f64,
    /// Smallest contact distance, capped at the narrow band; infinite
    /// without collisions.
    pub d_min: f64,
}

/// State at a time level. Velocities live on the P2 nodes of `mesh`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimState {
    pub step: usize,
    pub t: f64,
    pub mesh: Mesh,
    pub ale: AleState,
    pub bodies: Vec<Body>,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    /// Velocity of the previous level, kept for BDF2.
    pub previous: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub records: Vec<TrajectoryRecord>,
    pub contacts: Vec<ContactPair>,
    pub external: Vec<External>,
    pub remeshed: bool,
    pub min_quality: f64,
    pub fixed_point_iterations: usize,
    pub picard_iterations: usize,
}

impl StepReport {
    /// Norm of the summed body–body collision forces.
    pub fn body_force_imbalance(&self) -> f64 {
        let s = self.external.iter().fold([0.0, 0.0], |acc, e| geom::add(acc, e.body_force));
        geom::norm(s)
    }
}

struct Evaluation {
    solution: CoupledSolution,
    contacts: Vec<ContactPair>,
    external: Vec<External>,
    picard: usize,
}

pub struct Simulation {
    pub scenario: Scenario,
    pub state: SimState,
    /// Body forces used by the last step; a change invalidates the stored
    /// Stokes velocities.
    loads_used: Vec<Point>,
    warned: bool,
}

impl Simulation {
    /// Builds the mesh and bodies of a scenario at `t = 0`.
    pub fn new(scenario: Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let domain = scenario.build_domain()?;
        let mesh = domain.mesh;
        let mut bodies = Vec::with_capacity(scenario.body.len());
        for (b, spec) in scenario.body.iter().enumerate() {
            let vertices = mesh.swimmer_vertices(b);
            let positions: Vec<Point> = vertices.iter().map(|&v| mesh.vertices()[v]).collect();
            let loops: Vec<Vec<Point>> = mesh
                .swimmer_loops(b)
                .iter()
                .map(|l| l.iter().map(|&v| mesh.vertices()[v]).collect())
                .collect();
            let mut body = Body::new(
                b,
                spec.density,
                spec.gait.clone(),
                domain.anchors[b],
                spec.theta,
                vertices,
                &positions,
                &loops,
            )?;
            body.set_velocity(spec.velocity, spec.omega);
            bodies.push(body);
        }
        let dofmap = DofMap::new(&mesh);
        let state = SimState {
            step: 0,
            t: 0.0,
            ale: AleState::new(mesh.clone()),
            velocity: vec![0.0; dofmap.n_velocity()],
            pressure: vec![0.0; dofmap.n_pressure()],
            mesh,
            bodies,
            previous: None,
        };
        Ok(Self::from_state(scenario, state))
    }

    /// Continues from a saved state.
    pub fn from_state(scenario: Scenario, state: SimState) -> Self {
        let loads_used = scenario.body.iter().map(|b| b.force).collect();
        Simulation { scenario, state, loads_used, warned: false }
    }

    pub fn n_steps(&self) -> usize {
        self.scenario.time.n_steps()
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.n_steps()
    }

    /// Records of the current state with no collision data.
    pub fn initial_records(&self) -> Vec<TrajectoryRecord> {
        self.state.bodies.iter().map(|b| record(self.state.t, b, &External::default(), f64::INFINITY)).collect()
    }

    fn time_at(&self, step: usize) -> f64 {
        step as f64 * self.scenario.time.dt
    }

    /// Replaces the start-of-step mesh after a remesh.
    fn commit_remesh(&mut self, out: &RemeshOutput) -> Result<(), SimError> {
        let old_dofmap = DofMap::new(&self.state.mesh);
        let new_dofmap = DofMap::new(&out.mesh);
        let s = &mut self.state;
        s.velocity = transfer_p2(&s.mesh, &old_dofmap, &s.velocity, &new_dofmap)?;
        if let Some(prev) = &s.previous {
            s.previous = Some(transfer_p2(&s.mesh, &old_dofmap, prev, &new_dofmap)?);
        }
        s.pressure = crate::ale::transfer_p1(&s.mesh, &s.pressure, &out.mesh)?;
        for body in &mut s.bodies {
            for v in &mut body.vertices {
                *v = out.vertex_map[*v].expect("body vertices survive remeshing");
            }
        }
        let count = s.ale.remesh_count + 1;
        s.ale = AleState::new(out.mesh.clone());
        s.ale.remesh_count = count;
        s.mesh = out.mesh.clone();
        log::info!("remeshed at step {} ({} cells)", s.step, s.mesh.n_cells());
        Ok(())
    }

    /// Collisions, gait trace, boundary data and the coupled solve on one
    /// configuration.
    fn evaluate(
        &self,
        mesh: &Mesh,
        bodies: &[Body],
        t_gait: f64,
        t_data: f64,
        u_ale: Option<&[f64]>,
    ) -> Result<Evaluation, SimError> {
        let dofmap = DofMap::new(mesh);
        let (contacts, external) = match self.scenario.collision_params() {
            Some(params) => {
                let fields = compute_fields(mesh, bodies.len(), params.d_max);
                let contacts = find_contacts(mesh, &fields, &params);
                if let Some(p) = contacts.iter().find(|p| p.active && p.distance <= 0.0) {
                    return Err(SimError::Interpenetration { step: self.state.step + 1, pair: p.kind });
                }
                let x_cm: Vec<Point> = bodies.iter().map(|b| b.x_cm).collect();
                let external = total_external(&x_cm, &contacts, &params);
                (contacts, external)
            }
            None => (Vec::new(), vec![External::default(); bodies.len()]),
        };
        let loads: Vec<(Point, f64)> = external
            .iter()
            .zip(&self.scenario.body)
            .map(|(e, spec)| (geom::add(e.force, spec.force), -e.torque))
            .collect();
        let trace = self.gait_trace(bodies, mesh, &dofmap, t_gait)?;
        let outer = self.outer_values(mesh, &dofmap, t_data);
        let zero;
        let u_ale = match u_ale {
            Some(u) => u,
            None => {
                zero = vec![0.0; dofmap.n_velocity()];
                &zero
            }
        };
        let (solution, picard) = self.solve_flow(mesh, &dofmap, bodies, &trace, &outer, &loads, u_ale, t_data)?;
        Ok(Evaluation { solution, contacts, external, picard })
    }

    /// Advances the state by one time step.
    ///
    /// Body positions at the new level follow the trapezoid rule between a
    /// start velocity and the velocity solved on the new configuration,
    /// iterated to a fixed point. With inertia the start velocity is the
    /// current state; in the Stokes limit it is recomputed on the current
    /// configuration with the gait rates of the step, since velocities are
    /// then instantaneous functions of shape and gait.
    pub fn step(&mut self) -> Result<StepReport, SimError> {
        let dt = self.scenario.time.dt;
        let t0 = self.state.t;
        let t1 = self.time_at(self.state.step + 1);
        let t_mid = t0 + 0.5 * dt;
        let ale = self.scenario.ale.clone();
        let stokes = self.scenario.fluid.rho == 0.0;
        let mut picard_total = 0;

        let unsteady = self.state.bodies.iter().any(|b| b.gait.deforms_boundary())
            || self.scenario.boundary.iter().any(|b| match &b.condition {
                scenario::BoundaryCondition::Dirichlet { value } | scenario::BoundaryCondition::Neumann { value } => {
                    value.iter().any(|e| e.depends_on_time())
                }
                scenario::BoundaryCondition::NoSlip => false,
            })
            || self.scenario.fluid.force.as_ref().is_some_and(|f| f.iter().any(|e| e.depends_on_time()));
        let loads: Vec<Point> = self.scenario.body.iter().map(|b| b.force).collect();
        let reload = loads != self.loads_used;
        let start: Vec<(Point, f64)> = if stokes && !self.state.bodies.is_empty() && (self.state.step == 0 || unsteady || reload) {
            let ev = self.evaluate(&self.state.mesh, &self.state.bodies, t_mid, t_mid, None)?;
            picard_total += ev.picard;
            ev.solution.ell.iter().copied().zip(ev.solution.omega.iter().copied()).collect()
        } else {
            self.state.bodies.iter().map(|b| (b.ell, b.omega)).collect()
        };

        let mut remeshed = false;
        let mut latest: Option<Vec<(Point, f64)>> = None;
        let mut k = 0;
        let (domain, mut bodies, ev) = loop {
            let mut bodies = self.state.bodies.clone();
            for (b, body) in bodies.iter_mut().enumerate() {
                let (ell, omega) = match &latest {
                    None => start[b],
                    Some(v) => (geom::midpoint(start[b].0, v[b].0), 0.5 * (start[b].1 + v[b].1)),
                };
                body.advance_with(t0, dt, ell, omega);
            }
            let mut targets = BTreeMap::new();
            for body in &bodies {
                for (i, &v) in body.vertices.iter().enumerate() {
                    targets.insert(v, body.position(i));
                }
            }
            let domain = step_domain(&self.state.ale, &self.state.mesh, &targets, dt, ale.quality_threshold)?;
            if let Some(out) = &domain.remeshed {
                self.commit_remesh(out)?;
                for (body, fresh) in bodies.iter_mut().zip(&self.state.bodies) {
                    body.vertices.clone_from(&fresh.vertices);
                }
                remeshed = true;
            }
            let ev = self.evaluate(&domain.mesh, &bodies, t_mid, t1, Some(&domain.u_ale))?;
            picard_total += ev.picard;
            k += 1;

            // Distance between the positions used and those implied by the
            // new velocities.
            let mut change: f64 = 0.0;
            for (b, body) in self.state.bodies.iter().enumerate() {
                let ell = geom::midpoint(start[b].0, ev.solution.ell[b]);
                let omega = 0.5 * (start[b].1 + ev.solution.omega[b]);
                let x = geom::add(body.x_cm, geom::scale(ell, dt));
                let r = body.shape.iter().map(|&p| geom::norm(p)).fold(0.0, f64::max);
                let dtheta = geom::wrap_angle(body.theta + dt * omega - bodies[b].theta);
                change = change.max(geom::dist(x, bodies[b].x_cm) + r * dtheta.abs());
            }
            latest = Some(ev.solution.ell.iter().copied().zip(ev.solution.omega.iter().copied()).collect());
            let done = change <= ale.fixed_point_tol;
            if done || k >= ale.fixed_point_iterations {
                if !done {
                    if ale.abort_on_nonconvergence {
                        return Err(SimError::NotConverged { what: "position fixed point", step: self.state.step + 1, change });
                    }
                    let step = self.state.step + 1;
                    if self.warned {
                        log::debug!("position fixed point: change {change:.3e} after {k} iterations at step {step}");
                    } else {
                        log::warn!(
                            "position fixed point: change {change:.3e} after {k} iterations at step {step} \
                             (further occurrences logged at debug level)"
                        );
                        self.warned = true;
                    }
                }
                break (domain, bodies, ev);
            }
        };

        let Evaluation { solution, contacts, external, .. } = ev;
        for (b, body) in bodies.iter_mut().enumerate() {
            body.set_velocity(solution.ell[b], solution.omega[b]);
        }
        let d_min = min_distances(bodies.len(), &contacts);
        let records =
            bodies.iter().enumerate().map(|(b, body)| record(t1, body, &external[b], d_min[b])).collect();
        let s = &mut self.state;
        s.previous = Some(std::mem::replace(&mut s.velocity, solution.flow.u));
        s.pressure = solution.flow.p;
        s.mesh = domain.mesh;
        s.ale = domain.state;
        s.bodies = bodies;
        s.step += 1;
        s.t = t1;
        self.loads_used = loads;
        Ok(StepReport {
            records,
            contacts,
            external,
            remeshed,
            min_quality: domain.min_quality,
            fixed_point_iterations: k,
            picard_iterations: picard_total,
        })
    }

    /// Lab-frame gait velocity at every P2 node; zero away from bodies.
    fn gait_trace(&self, bodies: &[Body], mesh: &Mesh, dofmap: &DofMap, t_mid: f64) -> Result<Vec<Point>, SimError> {
        let nv = mesh.n_vertices();
        let mut trace = vec![[0.0, 0.0]; dofmap.n_nodes()];
        for body in bodies {
            match &body.gait {
                Gait::Passive => {}
                Gait::Squirmer(g) => {
                    let heading = body_to_lab(body.theta, g.heading);
                    for node in dofmap.gamma_nodes(body.id) {
                        let r = geom::sub(dofmap.node_coords()[node], body.x_cm);
                        trace[node] = g.velocity(r, heading)?;
                    }
                }
                Gait::SpermWave(_) | Gait::ThreeSphere(_) => {
                    for (i, &v) in body.vertices.iter().enumerate() {
                        trace[v] = body.deformation_velocity(t_mid, i);
                    }
                    for node in dofmap.gamma_nodes(body.id) {
                        if node >= nv {
                            let [a, b] = dofmap.topology().edges[node - nv];
                            trace[node] = geom::midpoint(trace[a], trace[b]);
                        }
                    }
                    if !dofmap.has_neumann() {
                        remove_flux(mesh, dofmap, body, &mut trace);
                    }
                }
            }
        }
        Ok(trace)
    }

    fn outer_values(&self, mesh: &Mesh, dofmap: &DofMap, t: f64) -> Vec<Option<Point>> {
        let exprs: Vec<Option<[crate::sim::expr::Expr; 2]>> =
            mesh.tags().iter().map(|tag| self.scenario.dirichlet(&tag.name).cloned()).collect();
        let outer = |tag: Option<usize>, x: Point| match tag.and_then(|t| exprs[t].as_ref()) {
            Some([ex, ey]) => [ex.eval(t, x[0], x[1]), ey.eval(t, x[0], x[1])],
            None => [0.0, 0.0],
        };
        boundary_values(dofmap, &outer, &|_, _| [0.0, 0.0])
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_flow(
        &self,
        mesh: &Mesh,
        dofmap: &DofMap,
        bodies: &[Body],
        trace: &[Point],
        outer: &[Option<Point>],
        loads: &[(Point, f64)],
        u_ale: &[f64],
        t: f64,
    ) -> Result<(CoupledSolution, usize), SimError> {
        let sc = &self.scenario;
        let dt = sc.time.dt;
        let rho = sc.fluid.rho;
        let force_expr = sc.fluid.force.clone();
        let force = move |x: Point| match &force_expr {
            Some([fx, fy]) => [fx.eval(t, x[0], x[1]), fy.eval(t, x[0], x[1])],
            None => [0.0, 0.0],
        };
        let neumann: Vec<Option<[crate::sim::expr::Expr; 2]>> =
            mesh.tags().iter().map(|tag| sc.neumann(&tag.name).cloned()).collect();
        let traction = move |tag: usize, x: Point| match &neumann[tag] {
            Some([gx, gy]) => [gx.eval(t, x[0], x[1]), gy.eval(t, x[0], x[1])],
            None => [0.0, 0.0],
        };
        let mut history = vec![self.state.velocity.clone()];
        if let Some(p) = &self.state.previous {
            history.push(p.clone());
        }
        let inertial = rho > 0.0;
        let mut u_conv = self.state.velocity.clone();
        let mut iterations = 0;
        loop {
            let asm = Assembly {
                params: FluidParams { mu: sc.fluid.mu, rho },
                dt: Some(dt),
                scheme: sc.time.scheme,
                history: &history,
                u_conv: inertial.then_some(u_conv.as_slice()),
                u_ale: inertial.then_some(u_ale),
                force: &force,
                traction: &traction,
            };
            let system = assemble(mesh, dofmap, &asm)?;
            let input = CoupledInput {
                system: &system,
                bodies,
                trace,
                outer,
                external: loads,
                dt: inertial.then_some(dt),
                gauge: PressureGauge::Auto,
            };
            let solution = solve_coupled(mesh, dofmap, &input)?;
            iterations += 1;
            if !inertial {
                return Ok((solution, iterations));
            }
            let scale = solution.flow.u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let change =
                solution.flow.u.iter().zip(&u_conv).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
            if change <= sc.ale.picard_tol {
                return Ok((solution, iterations));
            }
            if iterations >= sc.ale.picard_max {
                if sc.ale.abort_on_nonconvergence {
                    return Err(SimError::NotConverged { what: "Picard iteration", step: self.state.step + 1, change });
                }
                log::warn!("Picard iteration: change {change:.3e} after {iterations} iterations");
                return Ok((solution, iterations));
            }
            u_conv = solution.flow.u;
        }
    }
}

fn record(t: f64, body: &Body, e: &External, d_min: f64) -> TrajectoryRecord {
    TrajectoryRecord {
        t,
        body: body.id,
        x_cm: body.x_cm,
        theta: body.theta,
        ell: body.ell,
        omega: body.omega,
        force: e.force,
        torque: e.torque,
        d_min,
    }
}

fn min_distances(n: usize, contacts: &[ContactPair]) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n];
    for c in contacts {
        match c.kind {
            ContactKind::BodyBody(i, j) => {
                d[i] = d[i].min(c.distance);
                d[j] = d[j].min(c.distance);
            }
            ContactKind::BodyWall(i) => d[i] = d[i].min(c.distance),
        }
    }
    d
}

/// Makes the discrete outward flux of a deformation trace vanish by
/// subtracting a multiple of `x − x_CM`.
fn remove_flux(mesh: &Mesh, dofmap: &DofMap, body: &Body, trace: &mut [Point]) {
    let topo = dofmap.topology();
    let nv = mesh.n_vertices();
    let x = dofmap.node_coords();
    let flux = |f: &dyn Fn(usize) -> Point| -> f64 {
        let mut total = 0.0;
        for lp in mesh.swimmer_loops(body.id) {
            for k in 0..lp.len() {
                let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
                let m = nv + topo.edge_index(a, b).expect("boundary edge");
                let d = geom::sub(x[b], x[a]);
                // Outward from the body, whose loops are counter-clockwise.
                let n = [d[1], -d[0]];
                let (fa, fm, fb) = (f(a), f(m), f(b));
                total += (geom::dot(fa, n) + 4.0 * geom::dot(fm, n) + geom::dot(fb, n)) / 6.0;
            }
        }
        total
    };
    let q = flux(&|i| trace[i]);
    let area = flux(&|i| geom::sub(x[i], body.x_cm));
    if area.abs() > 0.0 && q != 0.0 {
        let c = q / area;
        for node in dofmap.gamma_nodes(body.id) {
            if matches!(dofmap.node_class(node), NodeClass::Gamma(_)) {
                trace[node] = geom::sub(trace[node], geom::scale(geom::sub(x[node], body.x_cm), c));
            }
        }
    }
}
