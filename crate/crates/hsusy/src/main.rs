//! Thin batch front end over the library: read a JSON run configuration,
//! build the chain, write CSV artifacts and a JSON verification report.
//! Exit codes: 0 all requested checks pass, 1 check failure, 2 inadmissible
//! configuration, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use hsusy::numerics::Grid;
use hsusy::report::{execute, sweep, CheckKind, CheckStatus, RunConfig, RunMode, RunOutcome};

#[derive(Parser)]
#[command(
    name = "hsusy",
    about = "Supersymmetric partner potentials of the harmonic oscillator: \
             chain construction, spectra, ladder operators, and algebra verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV tables and report.json
    #[arg(long)]
    out: PathBuf,
    /// Suppress the console summary
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build artifacts and run the verification suites
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated subset of checks (default: all)
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Write CSV artifacts only, no checks
    Build {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the verification suites only
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Write spectrum.csv only
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scan nu at fixed epsilon for chain admissibility
    Sweep {
        /// Factorization energy of the first-order chain
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = -1.5, allow_negative_numbers = true)]
        nu_from: f64,
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        nu_to: f64,
        #[arg(long, default_value_t = 0.1)]
        nu_step: f64,
        /// Output directory for sweep.csv
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

fn load_config(path: &PathBuf) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: RunConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(config)
}

fn parse_checks(names: Option<Vec<String>>) -> anyhow::Result<Option<Vec<CheckKind>>> {
    match names {
        None => Ok(None),
        Some(names) => names
            .iter()
            .map(|n| CheckKind::from_str(n.trim()).map_err(anyhow::Error::from))
            .collect::<anyhow::Result<Vec<_>>>()
            .map(Some),
    }
}

fn print_summary(outcome: &RunOutcome) {
    let report = &outcome.report;
    if !report.admissible {
        eprintln!(
            "inadmissible configuration: {}",
            report.singularity.as_deref().unwrap_or("unknown")
        );
        return;
    }
    for (name, check) in &report.checks {
        let status = match check.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "skipped",
        };
        let worst = check
            .residuals
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| format!("  {k} = {v:.3e} (tol {:.1e})", check.tolerance))
            .unwrap_or_default();
        println!("{name:>18}: {status}{worst}");
    }
    println!(
        "overall: {}",
        if report.passed { "pass" } else { "FAIL" }
    );
}

fn run_mode(common: &CommonArgs, mode: RunMode, checks: Option<Vec<String>>) -> anyhow::Result<i32> {
    let config = match load_config(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e:#}");
            return Ok(2);
        }
    };
    let selected = match parse_checks(checks) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e:#}");
            return Ok(2);
        }
    };
    let outcome = match execute(&config, &common.out, mode, selected) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return Ok(e.exit_code());
        }
    };
    if !common.quiet {
        print_summary(&outcome);
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { common, checks } => run_mode(common, RunMode::Full, checks.clone()),
        Command::Build { common } => run_mode(common, RunMode::BuildOnly, None),
        Command::Verify { common, checks } => run_mode(common, RunMode::VerifyOnly, checks.clone()),
        Command::Spectrum { common } => run_mode(common, RunMode::SpectrumOnly, None),
        Command::Sweep {
            epsilon,
            nu_from,
            nu_to,
            nu_step,
            out,
            quiet,
        } => (|| {
            let grid = Grid::default_line();
            let rows = match sweep(*epsilon, *nu_from, *nu_to, *nu_step, grid, out) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(e.exit_code());
                }
            };
            if !quiet {
                for r in &rows {
                    println!(
                        "nu = {:+.3}: {}",
                        r.nu,
                        if r.admissible {
                            "admissible".to_string()
                        } else {
                            format!(
                                "singular near x = {:.3}",
                                r.first_singularity_x.unwrap_or(f64::NAN)
                            )
                        }
                    );
                }
            }
            Ok(0)
        })(),
    };
    match code {
        Ok(c) => ExitCode::from(u8::try_from(c).unwrap_or(3)),
        Err(e) => {
            eprintln!("{e:#}");
            ExitCode::from(3)
        }
    }
}
