//! `nfnoma`: command-line front end for the near-field hybrid-NOMA simulator.
//!
//! Exit codes: 0 success, 2 bad configuration, 3 solver failure, 4 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nfnoma_core::csv;
use nfnoma_core::scenarios::{
    instance_records, load_spec, resolution_map, run_sweep, run_table1, solve_instance, summarize, table1_spec,
    ScenarioSpec, SUMMARY_CSV_HEADER,
};
use nfnoma_core::Error;

#[derive(Parser)]
#[command(
    name = "nfnoma",
    version,
    about = "Near-field hybrid-NOMA simulator and power allocator"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolution map over a polar grid.
    Resolution(Common),
    /// Every configured method on one instance.
    Solve(Common),
    /// Monte Carlo sweep over rates, beam counts and link budgets.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Per-point mean and standard error, as CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Optimal versus high-SNR allocation on the street layout.
    Table1(Common),
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; omitted keys keep their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// CSV output path; `-` writes to stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Overrides `sweep.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// `dotted.key=value` override, applied after the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Exit status for a failed run.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 4,
        e if e.is_solver_failure() => 3,
        Error::UnqualifiedBeam { .. } => 3,
        _ => 2,
    }
}

fn load(common: &Common, base: ScenarioSpec) -> Result<ScenarioSpec, Error> {
    let text = match &common.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?,
        ),
        None => None,
    };
    let mut overrides = common.set.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("sweep.seed={seed}"));
    }
    load_spec(&base, text.as_deref(), &overrides)
}

/// Writes through `f` to `path`, or to stdout for `-`.
fn write_out(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Error> {
    let wrap = |e: io::Error| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())));
    if path == Path::new("-") {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        f(&mut lock).map_err(wrap)?;
        return lock.flush().map_err(wrap);
    }
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

/// Runs one subcommand. A failed method inside `solve` is reported on
/// stdout and only sets the exit status.
fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Resolution(common) => {
            let spec = load(&common, ScenarioSpec::default())?;
            let map = resolution_map(&spec)?;
            let (i, j, v) = map.peak();
            println!(
                "peak {} at r = {} m, theta = {} rad",
                csv::fmt_f64(v),
                map.radii[i],
                map.angles[j]
            );
            if let Some(out) = &common.out {
                write_out(out, |w| map.write_csv(w))?;
            }
        }
        Command::Solve(common) => {
            let spec = load(&common, ScenarioSpec::default())?;
            let results = solve_instance(&spec)?;
            let worst = results
                .iter()
                .filter_map(|(_, r)| r.as_ref().err().map(exit_code))
                .max();
            let out = instance_records(&spec, results);
            for r in &out.records {
                match &r.outcome {
                    Ok(a) => println!(
                        "{:<10} {:<13} E = {} J  P0 = {} W  P = [{}] W",
                        r.method.as_str(),
                        a.mode.as_str(),
                        csv::fmt_f64(a.total_energy),
                        csv::fmt_f64(a.powers.final_slot),
                        csv::fmt_list(&a.powers.per_beam)
                    ),
                    Err(msg) => println!("{:<10} failed: {msg}", r.method.as_str()),
                }
            }
            if let Some(path) = &common.out {
                write_out(path, |w| out.write_csv(w))?;
            }
            if let Some(code) = worst {
                return Ok(ExitCode::from(code));
            }
        }
        Command::Sweep { common, summary } => {
            let spec = load(&common, ScenarioSpec::default())?;
            let out = run_sweep(&spec)?;
            let rows = summarize(&out);
            println!(
                "{} records, {} failed solves, {} sweep points",
                out.records.len(),
                out.failures(),
                rows.len()
            );
            if let Some(path) = &common.out {
                write_out(path, |w| out.write_csv(w))?;
            }
            if let Some(path) = &summary {
                write_out(path, |w| {
                    writeln!(w, "{SUMMARY_CSV_HEADER}")?;
                    rows.iter().try_for_each(|r| r.write_csv_row(&mut *w))
                })?;
            }
        }
        Command::Table1(common) => {
            let spec = load(&common, table1_spec())?;
            let report = run_table1(&spec)?;
            print!("{}", report.render());
            if let Some(path) = &common.out {
                write_out(path, |w| report.write_csv(w))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
