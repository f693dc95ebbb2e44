use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hbdm_cli::{run_scenario, Invocation};

#[derive(Parser)]
#[command(name = "hbdm", version, about = "Bohm–Dirac dynamics on kinked foliations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate trajectories across kinks.
    Simulate(Args),
    /// Transport a |ψ|²-distributed ensemble and compare histograms.
    Equivariance(Args),
    /// Compare one-sided fluxes through the kink set.
    CheckCurrentCondition(Args),
    /// Finite-difference divergence of the current tensor.
    CheckDivergence(Args),
    /// Slater guidance at kinks of 3+1 wedge foliations.
    SlaterDemo(Args),
    /// Export foliation leaves and kink curves.
    Foliation(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the scenario's.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding the scenario's.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensemble runs.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Equivariance(a) => ("equivariance", a),
        Command::CheckCurrentCondition(a) => ("check-current-condition", a),
        Command::CheckDivergence(a) => ("check-divergence", a),
        Command::SlaterDemo(a) => ("slater-demo", a),
        Command::Foliation(a) => ("foliation", a),
    };
    let inv = Invocation {
        command: name.into(),
        config: args.config,
        out: args.out,
        seed: args.seed,
        threads: args.threads,
    };
    match run_scenario(&inv) {
        Ok(outcome) => {
            for c in &outcome.manifest.checks {
                let status = match (c.gated, c.passed) {
                    (true, true) => "PASS",
                    (true, false) => "FAIL",
                    (false, _) => "INFO",
                };
                println!("{status} {} value={:e} threshold={:e} {}", c.name, c.value, c.threshold, c.detail);
            }
            println!("manifest: {}", outcome.manifest_path.display());
            if outcome.manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
