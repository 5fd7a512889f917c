//! Per-run records and cross-repetition aggregation.
//!
//! A sweep produces one [`RunRecord`] per (scheme, grid, load, repetition)
//! run. [`aggregate_runs`] folds repetitions into one [`SummaryRow`] per
//! (scheme, grid, load) key and expresses each staggered scheme's collision
//! and delay means as a percentage decrease against the single-index
//! baseline at the same grid and load.

use std::collections::BTreeMap;

/// Name of the scheme all others are compared against.
pub const BASELINE_SCHEME: &str = "same";

/// Median of an unsorted sample; even lengths average the two middle
/// elements. Returns `None` for an empty sample.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Nearest-rank 95th percentile: the ceil(0.95 n)-th smallest sample.
pub fn percentile_95(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let rank = ((0.95 * sorted.len() as f64).ceil() as usize).max(1);
    Some(sorted[rank - 1])
}

/// Percentage decrease from `baseline` to `new_value`; positive when the
/// new value is lower. Undefined for a non-positive baseline.
pub fn percent_decrease(baseline: f64, new_value: f64) -> Option<f64> {
    if baseline > 0.0 {
        Some(100.0 * (baseline - new_value) / baseline)
    } else {
        None
    }
}

/// Flat outcome of one simulation run, as written to `runs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: u64,
    pub seed: u64,
    pub scheme: String,
    pub n_cells: usize,
    pub n_ues: usize,
    pub collisions: u64,
    pub n_failed: usize,
    /// Median/mean/p95 of connected-UE delays; `None` when no UE connected.
    pub delay_median_ms: Option<f64>,
    pub delay_mean_ms: Option<f64>,
    pub delay_p95_ms: Option<f64>,
}

/// Aggregate over the repetitions of one (scheme, n_cells, n_ues) key.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: String,
    pub n_cells: usize,
    pub n_ues: usize,
    pub mean_collisions: f64,
    pub collisions_min: u64,
    pub collisions_max: u64,
    /// Mean over runs of the per-run median delay, skipping runs where no
    /// UE connected.
    pub mean_median_delay_ms: Option<f64>,
    pub delay_median_min_ms: Option<f64>,
    pub delay_median_max_ms: Option<f64>,
    /// Number of runs that contributed a median delay.
    pub delay_run_count: usize,
    /// Collision decrease relative to the baseline scheme at the same grid
    /// and load; the baseline row carries 0 against itself. Absent when the
    /// baseline mean is zero or the baseline key is missing.
    pub pct_decrease_collisions: Option<f64>,
    pub pct_decrease_delay: Option<f64>,
}

/// Folds run records into one summary row per (scheme, n_cells, n_ues),
/// ordered by that key, with percentage decreases taken against
/// [`BASELINE_SCHEME`] rows of matching grid and load.
pub fn aggregate_runs(runs: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for run in runs {
        groups
            .entry((run.scheme.clone(), run.n_cells, run.n_ues))
            .or_default()
            .push(run);
    }

    let mut rows: Vec<SummaryRow> = groups
        .iter()
        .map(|((scheme, n_cells, n_ues), members)| {
            let collisions: Vec<f64> = members.iter().map(|r| r.collisions as f64).collect();
            let medians: Vec<f64> =
                members.iter().filter_map(|r| r.delay_median_ms).collect();
            SummaryRow {
                scheme: scheme.clone(),
                n_cells: *n_cells,
                n_ues: *n_ues,
                mean_collisions: mean(&collisions).expect("groups are non-empty"),
                collisions_min: members.iter().map(|r| r.collisions).min().unwrap(),
                collisions_max: members.iter().map(|r| r.collisions).max().unwrap(),
                mean_median_delay_ms: mean(&medians),
                delay_median_min_ms: medians
                    .iter()
                    .copied()
                    .min_by(|a, b| a.partial_cmp(b).unwrap()),
                delay_median_max_ms: medians
                    .iter()
                    .copied()
                    .max_by(|a, b| a.partial_cmp(b).unwrap()),
                delay_run_count: medians.len(),
                pct_decrease_collisions: None,
                pct_decrease_delay: None,
            }
        })
        .collect();

    let baseline: BTreeMap<(usize, usize), (f64, Option<f64>)> = rows
        .iter()
        .filter(|row| row.scheme == BASELINE_SCHEME)
        .map(|row| {
            (
                (row.n_cells, row.n_ues),
                (row.mean_collisions, row.mean_median_delay_ms),
            )
        })
        .collect();

    for row in &mut rows {
        if let Some(&(base_coll, base_delay)) = baseline.get(&(row.n_cells, row.n_ues)) {
            row.pct_decrease_collisions = percent_decrease(base_coll, row.mean_collisions);
            row.pct_decrease_delay = match (base_delay, row.mean_median_delay_ms) {
                (Some(b), Some(n)) => percent_decrease(b, n),
                _ => None,
            };
        }
    }
    rows
}

/// Builds the run record for one finished run.
pub fn run_record(
    run_id: u64,
    seed: u64,
    scheme: &str,
    n_cells: usize,
    n_ues: usize,
    collisions: u64,
    n_failed: usize,
    delays_ms: &[f64],
) -> RunRecord {
    RunRecord {
        run_id,
        seed,
        scheme: scheme.to_string(),
        n_cells,
        n_ues,
        collisions,
        n_failed,
        delay_median_ms: median(delays_ms),
        delay_mean_ms: mean(delays_ms),
        delay_p95_ms: percentile_95(delays_ms),
    }
}
