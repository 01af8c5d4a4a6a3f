//! `noma` binary: scenario files in, CSV out.
//!
//! Exit codes: 0 — success; 1 — usage, input, or verification error;
//! 2 — the scenario ran but some cluster or sweep point had no feasible
//! allocation (the CSV still reports everything that solved).

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use noma::Direction;
use noma_cli::scenario::Scenario;
use noma_cli::sweep::{PointStatus, SweepSpec};
use noma_cli::verify::VerifyConfig;
use noma_cli::{pipeline, sweep, tables, verify};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "noma",
    version,
    about = "NOMA user clustering and optimal power allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario: cluster users, allocate powers, emit CSV.
    Run {
        /// Path to a `noma-scenario v1` file.
        scenario: PathBuf,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Re-derive each cluster optimum numerically and append
        /// oracle columns (slower; grid search per cluster).
        #[arg(long)]
        oracle_check: bool,
    },
    /// Re-solve a scenario while one user's gain walks a dB range.
    Sweep {
        /// Path to a `noma-scenario v1` file.
        scenario: PathBuf,
        /// 1-based rank of the user to sweep (1 = strongest).
        #[arg(long)]
        user: usize,
        /// Sweep start, dB.
        #[arg(long)]
        from: f64,
        /// Sweep end (inclusive), dB.
        #[arg(long)]
        to: f64,
        /// Step, dB.
        #[arg(long)]
        step: f64,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the bundled 28-case benchmark suite at every studied
    /// cluster size and emit the summary table.
    Tables {
        /// Restrict to one direction (default: both).
        #[arg(long, value_enum)]
        direction: Option<DirectionArg>,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cross-check closed-form optima against the numerical oracle on
    /// random feasible instances; prints one PASS/FAIL line per
    /// direction × cluster size.
    Verify {
        /// RNG seed for instance generation.
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
        /// Instances per direction × cluster size.
        #[arg(long, default_value_t = VerifyConfig::default().instances)]
        instances: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Downlink,
    Uplink,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::Downlink => Direction::Downlink,
            DirectionArg::Uplink => Direction::Uplink,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default failure code (2) is taken by "ran but
            // infeasible", so usage errors map to 1 instead.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            output,
            oracle_check,
        } => {
            let mut scenario = load_scenario(&scenario)?;
            scenario.oracle_check |= oracle_check;
            let outcome = pipeline::run_scenario(&scenario)?;
            for co in &outcome.clusters {
                if let Some(why) = &co.failure {
                    eprintln!("cluster {}: {why}", co.index);
                }
            }
            emit(&output, |out| {
                pipeline::write_run_csv(&scenario, &outcome, out)
            })?;
            Ok(code_for(outcome.status() == "ok"))
        }
        Command::Sweep {
            scenario,
            user,
            from,
            to,
            step,
            output,
        } => {
            let scenario = load_scenario(&scenario)?;
            let spec = SweepSpec {
                user,
                from_db: from,
                to_db: to,
                step_db: step,
            };
            let rows = sweep::sweep_points(&scenario, &spec)?;
            emit(&output, |out| {
                sweep::write_sweep_csv(&scenario, &spec, &rows, out)
            })?;
            Ok(code_for(rows.iter().all(|r| r.status == PointStatus::Ok)))
        }
        Command::Tables { direction, output } => {
            let directions: Vec<Direction> = match direction {
                Some(d) => vec![d.into()],
                None => vec![Direction::Downlink, Direction::Uplink],
            };
            let mut rows = Vec::new();
            for d in directions {
                rows.extend(tables::table_rows(d)?);
            }
            emit(&output, |out| tables::write_tables_csv(&rows, out))?;
            Ok(code_for(rows.iter().all(|r| r.status == "ok")))
        }
        Command::Verify { seed, instances } => {
            let config = VerifyConfig {
                seed,
                instances,
                ..VerifyConfig::default()
            };
            let reports = verify::run_verify(&config)?;
            let mut all_pass = true;
            for report in &reports {
                println!("{}", report.summary_line(&config));
                all_pass &= report.pass(&config);
            }
            if all_pass {
                println!("verification passed: closed forms agree with the oracle");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("verification FAILED");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn load_scenario(path: &PathBuf) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    Scenario::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn emit(output: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match output {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            let mut out = BufWriter::new(file);
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)?;
        }
    }
    Ok(())
}

fn code_for(clean: bool) -> ExitCode {
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
