use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twistaff_cli::{run, table_csv, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "twistaff",
    about = "Verification suites for twisted affine Lie algebras: exact Casimir, \
             Laplacian, cohomology, and sampled analytic checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites from a JSON configuration.
    Verify {
        /// Path to the JSON suite configuration.
        #[arg(long)]
        config: PathBuf,
        /// Restrict the run to the named suites (repeatable); defaults to
        /// the suites listed in the configuration.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Write the JSON report here (a human summary always goes to
        /// stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the configuration, then to the
        /// number of cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Allow the slow tier (the order-two fold of E6).
        #[arg(long)]
        slow: bool,
    },
    /// Emit reference tables as CSV.
    Tables {
        /// Which table: fixpoints, theta, or dmu.
        #[arg(long)]
        what: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include the slow tier (the order-two fold of E6).
        #[arg(long)]
        slow: bool,
    },
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify { config, suites, out, jobs, slow } => {
            let mut cfg = match SuiteConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            if !suites.is_empty() {
                cfg.suites = suites;
            }
            if cfg.algebra.0 == 'E' && !slow {
                return config_error("type E configurations need --slow");
            }
            let report = match run(&cfg, jobs) {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            for r in &report.records {
                println!("[{}] {} ({} ms)\n    {}", r.status, r.id, r.timing_ms, r.details);
            }
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    return config_error(format!("cannot write {}: {e}", path.display()));
                }
            }
            if report.any_fail() {
                eprintln!("some checks failed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Tables { what, out, slow } => {
            let csv = match table_csv(&what, slow) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, csv) {
                        return config_error(format!("cannot write {}: {e}", path.display()));
                    }
                }
                None => print!("{csv}"),
            }
            ExitCode::SUCCESS
        }
    }
}
