//! Sweep orchestration and CSV output.
//!
//! A sweep crosses grid sizes, assignment schemes, UE loads, and repetition
//! seeds, runs every point through the engine, and aggregates the results.
//! Repetition `r` of every (grid, scheme, load) point uses master seed + r,
//! so schemes are compared on identical UE placements and draw streams and
//! the contrast between them is never an artifact of sampling different
//! arrival patterns.
//!
//! Runs are independent, so the sweep executes them in parallel; the job
//! list is built in a fixed order and collected positionally, which keeps
//! `runs.csv` byte-identical regardless of thread count. Floats are written
//! with the shortest representation that round-trips, so reloading a runs
//! file and re-aggregating reproduces the summary exactly.

use crate::engine::{run_scenario, EngineError, EventRecord, RunResult, ScenarioConfig, Scheme};
use crate::radio::BucketOutcome;
use crate::report::{aggregate_runs, run_record, RunRecord, SummaryRow};
use rayon::prelude::*;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad runs file, row {row}: {reason}")]
    Parse { row: usize, reason: String },
}

/// The grid sizes, loads, schemes, and repetition count of one sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Template scenario; per-point fields (`n_cells`, `n_ues`, `scheme`,
    /// `seed`) are overwritten for each run.
    pub base: ScenarioConfig,
    pub cell_counts: Vec<usize>,
    pub ue_counts: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub repetitions: u32,
    pub seed: u64,
    /// Retain per-run event logs for `events.csv`.
    pub keep_events: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            base: ScenarioConfig::default(),
            cell_counts: vec![2, 19],
            ue_counts: vec![10, 25, 50, 100, 200, 400],
            schemes: vec![
                Scheme::Same(crate::engine::default_same_index()),
                Scheme::DifferentRows,
            ],
            repetitions: 5,
            seed: 1,
            keep_events: false,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.cell_counts.is_empty() {
            return Err(SweepError::InvalidSpec("cell_counts is empty".into()));
        }
        if self.ue_counts.is_empty() {
            return Err(SweepError::InvalidSpec("ue_counts is empty".into()));
        }
        if !self.ue_counts.windows(2).all(|w| w[0] < w[1]) {
            return Err(SweepError::InvalidSpec(
                "ue_counts must be strictly increasing".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(SweepError::InvalidSpec("schemes is empty".into()));
        }
        if self.repetitions == 0 {
            return Err(SweepError::InvalidSpec("repetitions must be >= 1".into()));
        }
        self.base.validate()?;
        Ok(())
    }

    /// Total number of runs the sweep will execute.
    pub fn n_runs(&self) -> usize {
        self.cell_counts.len()
            * self.schemes.len()
            * self.ue_counts.len()
            * self.repetitions as usize
    }
}

/// Everything a sweep produces.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    /// One `(run_id, events)` entry per run, only when `keep_events` is set.
    pub events: Vec<(u64, Vec<EventRecord>)>,
}

/// Executes every point of the sweep and aggregates the results.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput, SweepError> {
    spec.validate()?;

    struct Job {
        run_id: u64,
        seed: u64,
        scheme: Scheme,
        n_cells: usize,
        n_ues: usize,
    }

    let mut jobs = Vec::with_capacity(spec.n_runs());
    for &n_cells in &spec.cell_counts {
        for scheme in &spec.schemes {
            for &n_ues in &spec.ue_counts {
                for rep in 0..spec.repetitions {
                    jobs.push(Job {
                        run_id: jobs.len() as u64,
                        seed: spec.seed + u64::from(rep),
                        scheme: scheme.clone(),
                        n_cells,
                        n_ues,
                    });
                }
            }
        }
    }

    let results: Vec<(RunRecord, Vec<EventRecord>)> = jobs
        .par_iter()
        .map(|job| -> Result<(RunRecord, Vec<EventRecord>), SweepError> {
            let cfg = ScenarioConfig {
                n_cells: job.n_cells,
                n_ues: job.n_ues,
                scheme: job.scheme.clone(),
                seed: job.seed,
                ..spec.base.clone()
            };
            let RunResult {
                collisions,
                delays_ms,
                failed_ues,
                event_log,
                flagged,
            } = run_scenario(&cfg, job.seed)?;
            if flagged {
                eprintln!(
                    "warning: run {} ({} cells, {} UEs, {}) hit the simulated \
                     time limit with UEs still in flight; raise sim_time_ms",
                    job.run_id,
                    job.n_cells,
                    job.n_ues,
                    job.scheme.label()
                );
            }
            let record = run_record(
                job.run_id,
                job.seed,
                job.scheme.label(),
                job.n_cells,
                job.n_ues,
                collisions,
                failed_ues.len(),
                &delays_ms,
            );
            let events = if spec.keep_events { event_log } else { Vec::new() };
            Ok((record, events))
        })
        .collect::<Result<Vec<_>, SweepError>>()?;

    let mut runs = Vec::with_capacity(results.len());
    let mut events = Vec::new();
    for (record, log) in results {
        if spec.keep_events {
            events.push((record.run_id, log));
        }
        runs.push(record);
    }
    let summary = aggregate_runs(&runs);
    Ok(SweepOutput {
        runs,
        summary,
        events,
    })
}

// ===== CSV formatting =====

const RUNS_HEADER: [&str; 10] = [
    "run_id",
    "seed",
    "scheme",
    "n_cells",
    "n_ues",
    "collisions",
    "n_failed",
    "delay_median_ms",
    "delay_mean_ms",
    "delay_p95_ms",
];

const SUMMARY_HEADER: [&str; 12] = [
    "scheme",
    "n_cells",
    "n_ues",
    "mean_collisions",
    "collisions_min",
    "collisions_max",
    "mean_median_delay_ms",
    "delay_median_min_ms",
    "delay_median_max_ms",
    "delay_run_count",
    "pct_decrease_collisions",
    "pct_decrease_delay",
];

const EVENTS_HEADER: [&str; 6] = [
    "run_id",
    "time_ms",
    "cell_id",
    "preamble_seq",
    "outcome",
    "ue_ids",
];

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_runs_csv(path: &Path, runs: &[RunRecord]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RUNS_HEADER)?;
    for r in runs {
        w.write_record([
            r.run_id.to_string(),
            r.seed.to_string(),
            r.scheme.clone(),
            r.n_cells.to_string(),
            r.n_ues.to_string(),
            r.collisions.to_string(),
            r.n_failed.to_string(),
            fmt_opt(r.delay_median_ms),
            fmt_opt(r.delay_mean_ms),
            fmt_opt(r.delay_p95_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.n_cells.to_string(),
            r.n_ues.to_string(),
            r.mean_collisions.to_string(),
            r.collisions_min.to_string(),
            r.collisions_max.to_string(),
            fmt_opt(r.mean_median_delay_ms),
            fmt_opt(r.delay_median_min_ms),
            fmt_opt(r.delay_median_max_ms),
            r.delay_run_count.to_string(),
            fmt_opt(r.pct_decrease_collisions),
            fmt_opt(r.pct_decrease_delay),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Serializes resolved buckets; the UE list is `|`-separated, and a captured
/// bucket lists the decoded winner first.
pub fn write_events_csv(
    path: &Path,
    events: &[(u64, Vec<EventRecord>)],
) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(EVENTS_HEADER)?;
    for (run_id, log) in events {
        for e in log {
            let (outcome, ues): (&str, Vec<usize>) = match &e.outcome {
                BucketOutcome::Idle => continue,
                BucketOutcome::Detected(ue) => ("detected", vec![*ue]),
                BucketOutcome::Collided(ues) => ("collided", ues.clone()),
                BucketOutcome::Captured { winner, losers } => {
                    let mut ids = vec![*winner];
                    ids.extend_from_slice(losers);
                    ("captured", ids)
                }
            };
            let ue_ids = ues
                .iter()
                .map(|u| u.to_string())
                .collect::<Vec<_>>()
                .join("|");
            w.write_record([
                run_id.to_string(),
                e.time_sf.to_string(),
                e.cell_id.to_string(),
                e.preamble_seq.to_string(),
                outcome.to_string(),
                ue_ids,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    row: usize,
) -> Result<T, SweepError>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(idx).ok_or(SweepError::Parse {
        row,
        reason: format!("missing column {}", RUNS_HEADER[idx]),
    })?;
    raw.parse().map_err(|e| SweepError::Parse {
        row,
        reason: format!("bad {}: {e}", RUNS_HEADER[idx]),
    })
}

fn parse_opt_field(
    record: &csv::StringRecord,
    idx: usize,
    row: usize,
) -> Result<Option<f64>, SweepError> {
    let raw = record.get(idx).ok_or(SweepError::Parse {
        row,
        reason: format!("missing column {}", RUNS_HEADER[idx]),
    })?;
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|e| SweepError::Parse {
        row,
        reason: format!("bad {}: {e}", RUNS_HEADER[idx]),
    })
}

/// Reads a runs file back into records, e.g. to re-aggregate it.
pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRecord>, SweepError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(RUNS_HEADER) {
        return Err(SweepError::Parse {
            row: 0,
            reason: format!("unexpected header: {}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut runs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        runs.push(RunRecord {
            run_id: parse_field(&record, 0, row)?,
            seed: parse_field(&record, 1, row)?,
            scheme: record
                .get(2)
                .ok_or(SweepError::Parse {
                    row,
                    reason: "missing column scheme".into(),
                })?
                .to_string(),
            n_cells: parse_field(&record, 3, row)?,
            n_ues: parse_field(&record, 4, row)?,
            collisions: parse_field(&record, 5, row)?,
            n_failed: parse_field(&record, 6, row)?,
            delay_median_ms: parse_opt_field(&record, 7, row)?,
            delay_mean_ms: parse_opt_field(&record, 8, row)?,
            delay_p95_ms: parse_opt_field(&record, 9, row)?,
        });
    }
    Ok(runs)
}
