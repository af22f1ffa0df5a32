use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use martineq::formats::{read_search_config, read_spec, read_tree};
use martineq::{execute, replay, Command, Report, RunOptions};
use martineq_core::{Exponent, InequalityId};

/// Verify Burkholder-type martingale inequalities exactly on probability trees
/// and by Monte Carlo for Itô integrals.
///
/// Exit status: 0 all satisfied, 1 input error, 2 violation candidate,
/// 3 inconclusive Monte Carlo verdict (0 with --allow-inconclusive).
#[derive(Debug, Parser)]
#[command(name = "martineq", version)]
struct Cli {
    /// Write the structured JSON report (with its run manifest) here.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Write the flat CSV table here.
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Worker threads for sampling and sweeps (0 = all cores). Results do
    /// not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Do not print the summary.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Exact evaluation of the discrete inequalities on a tree file.
    VerifyDiscrete {
        /// Tree file (JSON).
        #[arg(long)]
        tree: PathBuf,
        /// Exponent p ≥ 2.
        #[arg(long, value_parser = exponent)]
        p: Exponent,
        /// Level to check; all levels when omitted.
        #[arg(long)]
        n: Option<usize>,
        /// Inequality ids; all tree inequalities when omitted.
        #[arg(long, num_args = 1..)]
        ineq: Vec<InequalityId>,
    },
    /// Monte Carlo evaluation of the Itô-integral inequalities.
    VerifyContinuous {
        /// Integrand spec file (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Exponent p ≥ 2.
        #[arg(long, value_parser = exponent)]
        p: Exponent,
        /// Evaluation time; must be a grid point.
        #[arg(long)]
        t: f64,
        /// Number of simulated paths.
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        seed: u64,
        /// C-BURK-1, C-BURK-2, ZAKAI-MAIN and/or ZAKAI-MAX.
        #[arg(long, num_args = 1.., required = true)]
        ineq: Vec<InequalityId>,
        /// Exit 0 when a verdict is inconclusive.
        #[arg(long)]
        allow_inconclusive: bool,
    },
    /// Extremal-ratio search described by a JSON config.
    Sharpness {
        /// Search config file (JSON).
        #[arg(long)]
        config: PathBuf,
    },
    /// E|Z|^p for a standard normal Z.
    GaussianMoment {
        #[arg(long)]
        p: f64,
    },
    /// Classical versus improved constants.
    CompareConstants {
        #[arg(long, value_parser = exponent)]
        p: Exponent,
    },
    /// Property sweep over seeded random trees.
    RandomTrees {
        /// Number of trees.
        #[arg(long)]
        count: usize,
        /// Maximum depth; each tree draws its depth from 1..=DEPTH.
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',', value_parser = exponent, required = true)]
        p: Vec<Exponent>,
    },
    /// Re-execute the manifest of a report and check the result is identical.
    Replay {
        #[arg(value_name = "REPORT")]
        recorded: PathBuf,
    },
}

fn exponent(s: &str) -> Result<Exponent, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Exponent::new(v).map_err(|e| e.to_string())
}

fn source(path: &Path) -> Option<String> {
    Some(path.display().to_string())
}

fn command(sub: Sub) -> martineq::Result<Command> {
    Ok(match sub {
        Sub::VerifyDiscrete { tree, p, n, ineq } => {
            Command::VerifyDiscrete { source: source(&tree), tree: read_tree(&tree)?, p, n, ineq }
        }
        Sub::VerifyContinuous { spec, p, t, paths, seed, ineq, allow_inconclusive } => Command::VerifyContinuous {
            source: source(&spec),
            spec: read_spec(&spec)?,
            p,
            t,
            paths,
            seed,
            ineq,
            allow_inconclusive,
        },
        Sub::Sharpness { config } => {
            Command::Sharpness { source: source(&config), config: read_search_config(&config)? }
        }
        Sub::GaussianMoment { p } => Command::GaussianMoment { p },
        Sub::CompareConstants { p } => Command::CompareConstants { p },
        Sub::RandomTrees { count, depth, seed, p } => Command::RandomTrees { count, depth, seed, p },
        Sub::Replay { .. } => unreachable!("handled by the caller"),
    })
}

struct Output {
    report: Option<PathBuf>,
    csv: Option<PathBuf>,
    quiet: bool,
}

impl Output {
    fn emit(&self, report: &Report) -> martineq::Result<()> {
        if !self.quiet {
            print!("{}", report.summary());
        }
        if let Some(path) = &self.report {
            report.write_json(path)?;
        }
        if let Some(path) = &self.csv {
            report.write_csv_file(path)?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> martineq::Result<i32> {
    let opts = RunOptions { threads: cli.threads, ..RunOptions::from_env()? };
    let out = Output { report: cli.report, csv: cli.csv, quiet: cli.quiet };
    let report = match cli.command {
        Sub::Replay { recorded } => {
            let (_, rerun) = replay(&recorded, &opts)?;
            if !out.quiet {
                println!("replay of {} is identical", recorded.display());
            }
            rerun
        }
        sub => execute(&command(sub)?, &opts)?,
    };
    out.emit(&report)?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
