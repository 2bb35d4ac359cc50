use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swimale::sim::{bundled, run, RunOptions, Scenario, SimError};

#[derive(Parser)]
#[command(name = "swimale", version, about = "ALE finite-element simulation of swimmers in 2D flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a scenario file or a bundled scenario by name.
    Run {
        scenario: String,
        #[arg(long, default_value = "output")]
        output_dir: PathBuf,
        /// Overrides the final time.
        #[arg(long)]
        t_final: Option<f64>,
        /// Overrides the time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Continues from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(short, long, action = clap::ArgAction::Count)]
        verbose: u8,
    },
    /// Lists the bundled scenarios.
    List,
}

fn load(name: &str) -> Result<Scenario, SimError> {
    let path = Path::new(name);
    if path.exists() {
        return Ok(Scenario::load(path)?);
    }
    match bundled(name) {
        Some(text) => Ok(Scenario::from_toml(text)?),
        None => Ok(Scenario::load(path)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in swimale::sim::BUNDLED {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { scenario, output_dir, t_final, dt, resume, verbose } => {
            let level = match verbose {
                0 => "info",
                1 => "debug",
                _ => "trace",
            };
            env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
            let result = load(&scenario).and_then(|mut s| {
                if let Some(t) = t_final {
                    s.time.t_final = t;
                }
                if let Some(dt) = dt {
                    s.time.dt = dt;
                }
                s.validate()?;
                run(s, &RunOptions { output_dir, resume })
            });
            match result {
                Ok(summary) => {
                    log::info!(
                        "finished {} steps at t = {} ({} snapshots, {} remeshes)",
                        summary.steps,
                        summary.t,
                        summary.snapshots,
                        summary.remesh_count
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    log::error!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
