//! `kappaloop` — scenario-driven action integrals of Hamiltonian loops on
//! unitary coadjoint orbits.
//!
//! The `run` subcommand executes a scenario's tasks, prints one summary
//! line per task, and writes a deterministic JSON report (plus CSV
//! convergence tables) into the output directory. Exit codes are fixed for
//! CI use: 0 when every requested verification passes, 2 on input parse or
//! validation failures, 3 when a task fails a tolerance or errors
//! numerically, 4 when output files cannot be written.

mod report;
mod scenario;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scenario::{Overrides, Scenario};
use tasks::{run_task, Status, TaskInputs};

#[derive(Parser)]
#[command(
    name = "kappaloop",
    version,
    about = "Action integrals of Hamiltonian loops on unitary coadjoint orbits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario's tasks and write a JSON report plus CSV tables.
    Run {
        /// Scenario file (JSON).
        scenario: PathBuf,
        /// Output directory for report.json and convergence tables.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Lax solver step count.
        #[arg(long)]
        steps: Option<usize>,
        /// Override the cap quadrature tolerance.
        #[arg(long = "quad-tol")]
        quad_tol: Option<f64>,
    },
    /// Parse and validate a scenario file without running it.
    Validate {
        /// Scenario file (JSON).
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenario, out, seed, steps, quad_tol } => {
            run(&scenario, &out, Overrides { seed, steps, quad_tol })
        }
        Command::Validate { scenario } => validate(&scenario),
    }
}

fn run(path: &Path, out: &Path, overrides: Overrides) -> ExitCode {
    let (scenario, text) = match Scenario::load(path) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    // Validation already succeeded, so these conversions cannot fail; the
    // matches keep the exit-code contract airtight anyway.
    let built = scenario.orbit_spec().and_then(|spec| {
        let dim = spec.dim();
        let main = scenario.loop_path(dim)?;
        let second = scenario.loop2_path(dim)?;
        let deformation = scenario.deformation_data(dim)?;
        Ok((spec, main, second, deformation))
    });
    let (spec, main_loop, second, deformation) = match built {
        Ok(parts) => parts,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    let num = scenario.resolved_numerics(&overrides);
    let inputs = TaskInputs {
        spec: &spec,
        path: &main_loop,
        second: second.as_ref(),
        deformation: deformation.as_ref(),
        num: &num,
    };

    let mut outcomes = Vec::with_capacity(scenario.tasks.len());
    for &task in &scenario.tasks {
        let outcome = run_task(task, &inputs);
        println!(
            "task {}: {} ({})",
            outcome.name,
            outcome.status.as_str().to_uppercase(),
            outcome.summary
        );
        outcomes.push(outcome);
    }

    let digest = report::scenario_hash(text.as_bytes());
    let timestamp = chrono::Utc::now().to_rfc3339();
    match report::write_outputs(out, &digest, &num, &outcomes, &timestamp) {
        Ok(files) => {
            println!("report: {}", files.report.display());
            for table in &files.tables {
                println!("table: {}", table.display());
            }
        }
        Err(e) => {
            eprintln!("cannot write outputs under {}: {e}", out.display());
            return ExitCode::from(4);
        }
    }

    let failed: Vec<&str> =
        outcomes.iter().filter(|o| o.status != Status::Pass).map(|o| o.name).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed tasks: {}", failed.join(", "));
        ExitCode::from(3)
    }
}

fn validate(path: &Path) -> ExitCode {
    match Scenario::load(path) {
        Ok(_) => {
            println!("{}: OK", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
