//! Command-line front end: sweep simulation, capture analysis, and
//! synthetic fixture generation, all emitting plot-ready CSV tables.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rachsim::analyzer::{
    collision_risk_histogram, format_usage_by_area, load_records, synthetic_records,
    unique_ie_value_counts, write_formats_csv, write_histogram_csv, write_records_csv,
    write_unique_ies_csv, GroupBy,
};
use rachsim::config::{load_sweep_spec, CliOverrides};
use rachsim::sweep::{run_sweep, write_events_csv, write_runs_csv, write_summary_csv};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rachsim",
    version,
    about = "Simulates LTE random access contention under per-cell \
             PRACH-ConfigIndex assignment schemes and analyzes SIB2 captures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep over grid sizes, schemes, and UE loads; write runs.csv
    /// and summary.csv (and events.csv with --events).
    Simulate(SimulateArgs),
    /// Analyze a SIB2 capture CSV; write the three insight tables.
    Analyze(AnalyzeArgs),
    /// Generate the synthetic capture fixture.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration file (flat key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Assignment schemes: same, different, coloring, or file:PATH.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<String>>,
    /// Grid sizes in cells.
    #[arg(long, value_delimiter = ',')]
    cells: Option<Vec<usize>>,
    /// UE loads, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    ues: Option<Vec<usize>>,
    /// Master seed; repetition r of every point runs with seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Repetitions per sweep point.
    #[arg(long)]
    reps: Option<u32>,
    /// Output directory (default: $RACHSIM_OUT, else the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-bucket event log to events.csv.
    #[arg(long)]
    events: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Capture records CSV.
    #[arg(long)]
    input: PathBuf,
    /// Group the unique-IE counts: country or mno.
    #[arg(long)]
    group_by: Option<String>,
    /// Output directory (default: $RACHSIM_OUT, else the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory (default: $RACHSIM_OUT, else the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("RACHSIM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn prepare_out_dir(flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out_dir(flag);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

fn wrote(path: &Path) {
    println!("wrote {}", path.display());
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let overrides = CliOverrides {
        schemes: args.scheme,
        cells: args.cells,
        ues: args.ues,
        seed: args.seed,
        repetitions: args.reps,
    };
    let mut spec = load_sweep_spec(args.config.as_deref(), &overrides)?;
    spec.keep_events = args.events;
    let dir = prepare_out_dir(args.out)?;

    let output = run_sweep(&spec)?;

    let runs_path = dir.join("runs.csv");
    write_runs_csv(&runs_path, &output.runs)?;
    wrote(&runs_path);
    let summary_path = dir.join("summary.csv");
    write_summary_csv(&summary_path, &output.summary)?;
    wrote(&summary_path);
    if args.events {
        let events_path = dir.join("events.csv");
        write_events_csv(&events_path, &output.events)?;
        wrote(&events_path);
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let group_by = match &args.group_by {
        None => None,
        Some(raw) => match GroupBy::parse(raw) {
            Some(g) => Some(g),
            None => bail!("unknown --group-by '{raw}' (expected country or mno)"),
        },
    };
    let dir = prepare_out_dir(args.out)?;

    let report = load_records(&args.input)
        .with_context(|| format!("cannot load {}", args.input.display()))?;
    for col in &report.extra_columns {
        eprintln!("warning: ignoring unknown column '{col}'");
    }
    if report.duplicates_dropped > 0 {
        eprintln!(
            "warning: dropped {} duplicate cell rows (kept first occurrence)",
            report.duplicates_dropped
        );
    }
    let records = &report.records;

    let histogram_path = dir.join("insight1_histogram.csv");
    write_histogram_csv(&histogram_path, &collision_risk_histogram(records))?;
    wrote(&histogram_path);

    let usage = format_usage_by_area(records);
    if !usage.excluded_reserved.is_empty() {
        eprintln!(
            "warning: {} records with reserved prach_config_index excluded from format usage",
            usage.excluded_reserved.len()
        );
        for ex in &usage.excluded_reserved {
            eprintln!(
                "warning:   {} / {} cell {} announces reserved index {}",
                ex.location_id, ex.mno, ex.cell_id, ex.prach_config_index
            );
        }
    }
    let formats_path = dir.join("insight2_formats.csv");
    write_formats_csv(&formats_path, &usage)?;
    wrote(&formats_path);

    let ies_path = dir.join("insight3_unique_ies.csv");
    write_unique_ies_csv(&ies_path, &unique_ie_value_counts(records, group_by), group_by)?;
    wrote(&ies_path);
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let dir = prepare_out_dir(args.out)?;
    let path = dir.join("synthetic_measurements.csv");
    write_records_csv(&path, &synthetic_records(args.seed))?;
    wrote(&path);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
