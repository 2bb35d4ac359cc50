use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{write_vtu, CsvWriter, PvdWriter};
use super::{Scenario, SimError, SimState, Simulation};
use crate::collision::compute_fields;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    /// Checkpoint to continue from.
    pub resume: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub snapshots: usize,
    pub remesh_count: usize,
    pub trajectory: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub scenario: Scenario,
    pub state: SimState,
    /// Snapshot series written so far, as `(t, file name)`.
    pub snapshots: Vec<(f64, String)>,
}

pub fn save_checkpoint(path: &Path, sim: &Simulation, snapshots: &[(f64, String)]) -> Result<(), SimError> {
    let ck = Checkpoint { scenario: sim.scenario.clone(), state: sim.state.clone(), snapshots: snapshots.to_vec() };
    let text = serde_json::to_string(&ck).map_err(|e| SimError::Checkpoint(e.to_string()))?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(|source| SimError::Io { path: tmp.clone(), source })?;
    fs::rename(&tmp, path).map_err(|source| SimError::Io { path: path.to_path_buf(), source })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, SimError> {
    let text = fs::read_to_string(path).map_err(|source| SimError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| SimError::Checkpoint(format!("{}: {e}", path.display())))
}

fn snapshot(sim: &Simulation, dir: &Path, pvd: &mut PvdWriter) -> Result<(), SimError> {
    let name = format!("snapshot_{:06}.vtu", sim.state.step);
    let fields = match (sim.scenario.output.distance_fields, sim.scenario.collision_params()) {
        (true, Some(p)) => Some(compute_fields(&sim.state.mesh, sim.state.bodies.len(), p.d_max)),
        _ => None,
    };
    write_vtu(&dir.join(&name), &sim.state, fields.as_ref())?;
    pvd.add(sim.state.t, name)
}

/// Runs a scenario to its final time, writing `trajectory.csv`,
/// `snapshot_*.vtu`, `series.pvd` and `checkpoint.json` into the output
/// directory. The final state is always among the snapshots. On a step
/// failure the last good state is checkpointed before the error is returned.
pub fn run(scenario: Scenario, options: &RunOptions) -> Result<RunSummary, SimError> {
    let dir = &options.output_dir;
    fs::create_dir_all(dir).map_err(|source| SimError::Io { path: dir.clone(), source })?;
    let csv_path = dir.join("trajectory.csv");
    let pvd_path = dir.join("series.pvd");
    let ck_path = dir.join("checkpoint.json");

    let (mut sim, mut csv, mut pvd) = match &options.resume {
        Some(path) => {
            let ck = load_checkpoint(path)?;
            if ck.state.bodies.len() != scenario.body.len() {
                return Err(SimError::Checkpoint("checkpoint and scenario disagree on the number of bodies".into()));
            }
            let rows = ck.state.step * ck.state.bodies.len();
            let csv = CsvWriter::resume(&csv_path, rows)?;
            let pvd = PvdWriter::new(&pvd_path, ck.snapshots);
            (Simulation::from_state(scenario, ck.state), csv, pvd)
        }
        None => {
            let sim = Simulation::new(scenario)?;
            let csv = CsvWriter::create(&csv_path)?;
            let mut pvd = PvdWriter::new(&pvd_path, Vec::new());
            snapshot(&sim, dir, &mut pvd)?;
            (sim, csv, pvd)
        }
    };
    log::info!("{} steps of dt = {}", sim.n_steps(), sim.scenario.time.dt);

    let vtu_every = sim.scenario.output.vtu_every;
    let ck_every = sim.scenario.output.checkpoint_every;
    while !sim.is_finished() {
        let report = match sim.step() {
            Ok(r) => r,
            Err(e) => {
                log::error!("step {} failed: {e}", sim.state.step + 1);
                if let Err(ck) = save_checkpoint(&ck_path, &sim, &pvd.entries) {
                    log::error!("could not write checkpoint: {ck}");
                }
                return Err(e);
            }
        };
        csv.write(&report.records)?;
        let step = sim.state.step;
        log::debug!(
            "step {step} t = {:.6} quality {:.3} fixed point {} Picard {}{}",
            sim.state.t,
            report.min_quality,
            report.fixed_point_iterations,
            report.picard_iterations,
            if report.remeshed { " (remeshed)" } else { "" }
        );
        if vtu_every > 0 && step % vtu_every == 0 {
            snapshot(&sim, dir, &mut pvd)?;
        }
        if ck_every > 0 && step % ck_every == 0 {
            save_checkpoint(&ck_path, &sim, &pvd.entries)?;
        }
    }
    if pvd.entries.last().map(|(t, _)| *t) != Some(sim.state.t) {
        snapshot(&sim, dir, &mut pvd)?;
    }
    save_checkpoint(&ck_path, &sim, &pvd.entries)?;
    Ok(RunSummary {
        steps: sim.state.step,
        t: sim.state.t,
        snapshots: pvd.entries.len(),
        remesh_count: sim.state.ale.remesh_count,
        trajectory: csv_path,
    })
}
