use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ising_ais::cli::{self, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "ising-ais", version, about = "Annealed importance sampling for Ising models with mixed boundary conditions")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        config: PathBuf,
        /// Worker threads (defaults to all cores). Results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
        /// Also write the per-level log-weight history (history.csv).
        #[arg(long)]
        history: bool,
    },
    /// Print exact values for a model small enough to enumerate.
    Oracle {
        config: PathBuf,
        /// Also compute detailed-balance residuals of the exact Swendsen-Wang kernel.
        #[arg(long)]
        detailed_balance: bool,
    },
    /// Recompute diagnostics from a run directory and check them against report.json.
    Report { dir: PathBuf },
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Run { config, workers, history } => {
            if workers == Some(0) {
                return Err(CliError::Config("--workers must be at least 1".into()));
            }
            let summary = cli::cmd_run(&config, &RunOptions { workers, history })?;
            let r = &summary.report;
            println!("output: {}", summary.output_dir.display());
            println!("paths: {}  levels: {}  interior vertices: {}", r.num_paths, r.levels, r.n_interior);
            match &r.weights {
                Some(w) => {
                    println!("sample efficiency: {:.4}", w.efficiency);
                    println!("SW iterations per effective sample: {:.1}", w.iterations_per_effective_sample);
                    println!("log mean weight: {:.6} (rel. error {:.3e})", w.mean_weight.log_mean, w.mean_weight.relative_error);
                }
                None => println!("diagnostics unavailable: at least 2 paths are required"),
            }
        }
        Command::Oracle { config, detailed_balance } => {
            let report = cli::cmd_oracle(&config, detailed_balance)?;
            print!("{}", cli::oracle_json(&report));
        }
        Command::Report { dir } => {
            let v = cli::cmd_report(&dir)?;
            match &v.recomputed {
                None => println!("{} paths; diagnostics unavailable (fewer than 2 paths)", v.report.num_paths),
                Some(w) => {
                    println!("report.json verified against weights.csv (tolerance {:e})", cli::REPORT_TOLERANCE);
                    if v.history_checked {
                        println!("variance curve verified against history.csv");
                    }
                    println!("sample efficiency: {:.6}", w.efficiency);
                    println!("SW iterations per effective sample: {:.1}", w.iterations_per_effective_sample);
                    println!("level,theta,var_log_w_normalized");
                    for (l, t, var) in &v.curve {
                        println!("{l},{t:.6},{var:.6e}");
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ising-ais: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
