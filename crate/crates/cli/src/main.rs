//! `cseta run <scenario.json>`: executes a scenario and writes its report.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 schema or input
//! error, 3 numerical guard.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cseta::scenario::{run_scenario, RunOptions, RunOutcome, Scenario};
use cseta::Error;

#[derive(Parser)]
#[command(
    name = "cseta",
    version,
    about = "Complex eta invariants and spectral flow on flat tori"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        file: PathBuf,
        /// Only run experiments with this check name.
        #[arg(long)]
        check: Option<String>,
        /// Override every tolerance in the file.
        #[arg(long)]
        tol: Option<f64>,
        /// Write spectrum and track CSV files.
        #[arg(long)]
        emit_csv: bool,
        /// Seed for randomized experiments.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the report and CSV files; defaults to the paths in the
        /// scenario, relative to its location.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress the per-check summary on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Parse and validate a scenario file without running it.
    Validate { file: PathBuf },
}

fn read(file: &Path) -> cseta::Result<Scenario> {
    let text =
        fs::read_to_string(file).map_err(|e| Error::Schema(format!("{}: {e}", file.display())))?;
    Scenario::from_json(&text)
}

struct Targets {
    report: Option<PathBuf>,
    csv_dir: PathBuf,
}

fn targets(file: &Path, s: &Scenario, out: Option<&Path>) -> Targets {
    let base = file.parent().unwrap_or(Path::new("."));
    match out {
        Some(dir) => Targets {
            report: Some(dir.join(format!("{}.report.json", s.name))),
            csv_dir: dir.to_path_buf(),
        },
        None => Targets {
            report: s.outputs.report.as_ref().map(|r| base.join(r)),
            csv_dir: base.join(
                s.outputs
                    .csv_dir
                    .clone()
                    .unwrap_or_else(|| format!("{}_csv", s.name)),
            ),
        },
    }
}

fn write(outcome: &RunOutcome, t: &Targets) -> std::io::Result<()> {
    let json = outcome.report.to_json();
    match &t.report {
        Some(path) => {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, json + "\n")?;
        }
        None => println!("{json}"),
    }
    if !outcome.artifacts.is_empty() {
        fs::create_dir_all(&t.csv_dir)?;
        for (name, body) in &outcome.artifacts {
            fs::write(t.csv_dir.join(name), body)?;
        }
    }
    Ok(())
}

fn summarize(outcome: &RunOutcome) {
    for e in &outcome.report.entries {
        eprintln!(
            "{} {} residual {:.3e} (tol {:.1e})",
            if e.pass { "PASS" } else { "FAIL" },
            e.id,
            e.residual,
            e.tolerance
        );
    }
    let failed = outcome.report.failures().count();
    eprintln!("{} checks, {failed} failed", outcome.report.entries.len());
}

fn run(cli: Cli) -> cseta::Result<i32> {
    match cli.command {
        Command::Validate { file } => {
            let s = read(&file)?;
            eprintln!("{}: {} experiments, valid", s.name, s.experiments.len());
            Ok(0)
        }
        Command::Run {
            file,
            check,
            tol,
            emit_csv,
            seed,
            out,
            quiet,
        } => {
            let s = read(&file)?;
            if let Some(t) = tol {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::Schema(format!("--tol must be positive, got {t}")));
                }
            }
            let opts = RunOptions {
                check_filter: check,
                tol_override: tol,
                seed,
                emit_csv,
            };
            let outcome = run_scenario(&s, &opts)?;
            write(&outcome, &targets(&file, &s, out.as_deref()))?;
            if !quiet {
                summarize(&outcome);
            }
            Ok(outcome.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
