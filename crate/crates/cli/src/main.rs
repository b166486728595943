use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msvi_cli::exit;
use msvi_cli::reconstruct::reconstruct;
use msvi_cli::run::{run, RunStatus};
use msvi_cli::verify::{verify, VerifyReport};
use msvi_cli::RunConfig;

#[derive(Parser)]
#[command(name = "msvi", version, about = "Multisymplectic variational integrator runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a config file, then verify it.
    Run { config: PathBuf },
    /// Re-check the artifacts of a run directory.
    Verify { run_dir: PathBuf },
    /// Write the run as a sequence of time slices.
    Reconstruct { run_dir: PathBuf },
}

fn report(r: &VerifyReport) -> i32 {
    for c in &r.checks {
        println!("{c}");
    }
    match (r.status, r.passed()) {
        (RunStatus::SolverFailure, _) => exit::SOLVER_FAILURE,
        (_, true) => exit::SUCCESS,
        (_, false) => exit::INVARIANT_VIOLATION,
    }
}

fn execute(cmd: Command) -> msvi_cli::Result<i32> {
    match cmd {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let out = run(&cfg)?;
            let m = &out.manifest;
            println!(
                "{}: {} solves, at most {} Newton iterations, {:.3} s",
                out.dir.display(),
                m.solves.len(),
                m.max_iterations,
                m.wall_time_seconds
            );
            if let Some(f) = &m.failure {
                eprintln!("solver failure at slice {}: {}", f.slice, f.message);
                return Ok(exit::SOLVER_FAILURE);
            }
            Ok(report(&verify(&out.dir)?))
        }
        Command::Verify { run_dir } => Ok(report(&verify(&run_dir)?)),
        Command::Reconstruct { run_dir } => {
            let r = reconstruct(&run_dir)?;
            for f in &r.files {
                println!("wrote {}", f.display());
            }
            Ok(exit::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::USAGE as u8)
        }
    }
}
