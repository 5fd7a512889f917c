//! Subframe-stepped simulation of contention-based random access.
//!
//! All UEs activate at subframe zero and run the four-step procedure against
//! their serving cell: preamble at the cell's next opportunity, random access
//! response (RAR) within a response window, then MSG3 and the MSG4 contention
//! resolution, all downlink steps error-free. A UE whose preamble collides
//! waits out the RAR window, backs off a uniform number of subframes, ramps
//! power, and retries until `preamble_trans_max` attempts are spent.
//!
//! One subframe is one millisecond; the clock is an unbounded absolute
//! subframe counter mapped onto (SFN, subframe) pairs for opportunity checks.

use crate::assignment::{
    assign_alternating_rows, assign_greedy_coloring, assign_same, load_assignment_file,
    verify_neighbor_distinct, Assignment, AssignmentError,
};
use crate::prach::{
    is_ra_opportunity, occasion_rule, PrachConfigIndex, PrachError, PrachOccasionRule,
    RaParameters, RadioTime,
};
use crate::radio::{
    preamble_tx_power_dbm, resolve_opportunity, BucketOutcome, PathLossModel,
    PreambleTransmission, ReceiverModel, DEFAULT_DETECTION_THRESHOLD_DBM,
    URBAN_PATH_LOSS_EXPONENT,
};
use crate::topology::{
    grid_rows, hex_grid, link_distance_m, neighbor_graph, place_ues_uniform, serving_cell,
    CellSite, Region, TopologyError, DEFAULT_CELL_ANTENNA_HEIGHT_M, DEFAULT_UE_HEIGHT_M,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Prach(#[from] PrachError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// How PRACH-ConfigIndex values are distributed over the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    /// Every cell announces the same index.
    Same(PrachConfigIndex),
    /// Alternating-rows stagger of the four-index palette.
    DifferentRows,
    /// Greedy graph coloring of the neighbor graph with the palette.
    GreedyColoring,
    /// Explicit `site_id,prach_index` file.
    File(PathBuf),
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Same(_) => "same",
            Scheme::DifferentRows => "different",
            Scheme::GreedyColoring => "coloring",
            Scheme::File(_) => "file",
        }
    }
}

/// Delays between the procedure's downlink/uplink steps, in subframes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageTimeline {
    /// Preamble to RAR.
    pub rar_delay_sf: u64,
    /// RAR to MSG3 completion.
    pub msg3_delay_sf: u64,
    /// MSG3 to MSG4 contention resolution.
    pub msg4_delay_sf: u64,
}

impl Default for MessageTimeline {
    fn default() -> Self {
        MessageTimeline {
            rar_delay_sf: 3,
            msg3_delay_sf: 6,
            msg4_delay_sf: 4,
        }
    }
}

impl MessageTimeline {
    /// Contention-free connection delay.
    pub fn total_sf(&self) -> u64 {
        self.rar_delay_sf + self.msg3_delay_sf + self.msg4_delay_sf
    }
}

/// Full description of one simulated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub n_cells: usize,
    pub n_ues: usize,
    pub isd_m: f64,
    pub carrier_hz: f64,
    pub scheme: Scheme,
    pub ra: RaParameters,
    pub sim_time_ms: u64,
    pub seed: u64,
    pub repetitions: u32,
    pub timeline: MessageTimeline,
    pub capture_margin_db: Option<f64>,
    pub path_loss_exponent: f64,
    pub detection_threshold_dbm: f64,
    pub palette: Vec<PrachConfigIndex>,
    pub cell_antenna_height_m: f64,
    pub ue_height_m: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_cells: 2,
            n_ues: 100,
            isd_m: 200.0,
            carrier_hz: 740.0e6,
            scheme: Scheme::Same(default_same_index()),
            ra: RaParameters::default(),
            sim_time_ms: 5000,
            seed: 1,
            repetitions: 5,
            timeline: MessageTimeline::default(),
            capture_margin_db: None,
            path_loss_exponent: URBAN_PATH_LOSS_EXPONENT,
            detection_threshold_dbm: DEFAULT_DETECTION_THRESHOLD_DBM,
            palette: crate::assignment::default_palette(),
            cell_antenna_height_m: DEFAULT_CELL_ANTENNA_HEIGHT_M,
            ue_height_m: DEFAULT_UE_HEIGHT_M,
        }
    }
}

/// Index announced by every cell under the `same` scheme: the most common
/// single-index configuration seen in live networks.
pub fn default_same_index() -> PrachConfigIndex {
    PrachConfigIndex::new(1).expect("index 1 is defined")
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.n_cells == 0 {
            return Err(EngineError::InvalidScenario("n_cells must be >= 1".into()));
        }
        if self.sim_time_ms == 0 {
            return Err(EngineError::InvalidScenario("sim_time_ms must be >= 1".into()));
        }
        if !(self.isd_m > 0.0) {
            return Err(EngineError::InvalidScenario("isd_m must be positive".into()));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(EngineError::InvalidScenario("carrier_hz must be positive".into()));
        }
        self.ra.validate()?;
        Ok(())
    }
}

/// Why a UE never connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// All `preamble_trans_max` attempts collided.
    AttemptsExhausted,
    /// The procedure was still in flight when simulated time ran out.
    SimTimeExpired,
}

impl FailureReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureReason::AttemptsExhausted => "attempts_exhausted",
            FailureReason::SimTimeExpired => "sim_time_expired",
        }
    }
}

/// Per-UE procedure state.
#[derive(Debug, Clone, PartialEq)]
pub enum UeState {
    /// Eligible to transmit at the serving cell's next opportunity at or
    /// after the backoff deadline.
    WaitingOpportunity,
    /// Preamble sent; waiting for a RAR that arrives at `rar_at` (if the
    /// preamble was decoded) before the window expires.
    WaitingRar {
        window_expires_at: u64,
        rar_at: Option<u64>,
    },
    /// RAR received; MSG3 sent; waiting for contention resolution.
    WaitingMsg4 { completes_at: u64 },
    Connected { delay_ms: u64 },
    Failed(FailureReason),
}

#[derive(Debug, Clone)]
pub struct UeSession {
    pub ue_id: usize,
    pub serving_cell: usize,
    pub state: UeState,
    /// 1-based attempt counter for the next (or in-flight) transmission.
    pub attempt_no: u32,
    pub chosen_seq: u16,
    pub first_tx_time: Option<u64>,
    pub backoff_until: u64,
}

/// One resolved (time, cell, sequence) bucket; idle buckets are not logged.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time_sf: u64,
    pub cell_id: usize,
    pub preamble_seq: u16,
    pub outcome: BucketOutcome,
}

/// Outcome of one simulation run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Preambles lost to contention, counted once per cell whose bucket the
    /// transmission congested.
    pub collisions: u64,
    /// Connection delay of each connected UE in ms, in UE id order.
    pub delays_ms: Vec<f64>,
    pub failed_ues: Vec<(usize, FailureReason)>,
    pub event_log: Vec<EventRecord>,
    /// Set when any UE was cut off by the end of simulated time, meaning
    /// `sim_time_ms` was too short for this load.
    pub flagged: bool,
}

// Stream separation within one run: UE draw streams come from the master
// seed XORed with the UE id and passed through a 64-bit finalizer; the
// placement stream uses a fixed salt instead of a UE id.
const PLACEMENT_STREAM_SALT: u64 = 0x706c_6163_656d_656e;

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn ue_stream_seed(master_seed: u64, ue_id: u64) -> u64 {
    mix64(master_seed ^ ue_id)
}

fn build_assignment(cfg: &ScenarioConfig, sites: &[CellSite]) -> Result<Assignment, EngineError> {
    let assignment = match &cfg.scheme {
        Scheme::Same(index) => assign_same(sites, *index),
        Scheme::DifferentRows => {
            let rows = grid_rows(sites, cfg.isd_m);
            assign_alternating_rows(&rows, &cfg.palette)?
        }
        Scheme::GreedyColoring => {
            let graph = neighbor_graph(sites, cfg.isd_m);
            assign_greedy_coloring(&graph, &cfg.palette)?
        }
        Scheme::File(path) => load_assignment_file(path, sites.len(), &cfg.palette)?,
    };
    if !matches!(cfg.scheme, Scheme::Same(_)) {
        debug_assert!(
            verify_neighbor_distinct(&neighbor_graph(sites, cfg.isd_m), &assignment)
                .unwrap_or(false),
            "staggered schemes must color neighbors distinctly"
        );
    }
    Ok(assignment)
}

/// Runs one scenario to completion. Identical `(cfg, seed)` pairs produce
/// identical results; runs share no mutable state and may execute in
/// parallel.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<RunResult, EngineError> {
    cfg.validate()?;

    let mut sites = hex_grid(cfg.n_cells, cfg.isd_m, cfg.cell_antenna_height_m)?;
    let assignment = build_assignment(cfg, &sites)?;
    for site in &mut sites {
        site.prach_index = Some(assignment[&site.id]);
    }
    let rules: Vec<PrachOccasionRule> = sites
        .iter()
        .map(|s| occasion_rule(s.prach_index.expect("assigned above")))
        .collect();

    let model = ReceiverModel {
        path_loss: PathLossModel::log_distance(cfg.carrier_hz, cfg.path_loss_exponent),
        detection_threshold_dbm: cfg.detection_threshold_dbm,
        capture_margin_db: cfg.capture_margin_db,
    };

    let region = Region::around_sites(&sites, cfg.isd_m / 2.0);
    let mut placement_rng =
        ChaCha8Rng::seed_from_u64(mix64(seed ^ PLACEMENT_STREAM_SALT));
    let ues = place_ues_uniform(cfg.n_ues, region, cfg.ue_height_m, &mut placement_rng);

    let serving: Vec<usize> = ues
        .iter()
        .map(|ue| serving_cell(ue, &sites, |d| model.path_loss.path_loss_db(d)))
        .collect();
    let pl_serving: Vec<f64> = ues
        .iter()
        .enumerate()
        .map(|(i, ue)| model.path_loss.path_loss_db(link_distance_m(ue, &sites[serving[i]])))
        .collect();
    let mut ue_rngs: Vec<ChaCha8Rng> = (0..cfg.n_ues)
        .map(|i| ChaCha8Rng::seed_from_u64(ue_stream_seed(seed, i as u64)))
        .collect();

    let mut sessions: Vec<UeSession> = (0..cfg.n_ues)
        .map(|i| UeSession {
            ue_id: i,
            serving_cell: serving[i],
            state: UeState::WaitingOpportunity,
            attempt_no: 1,
            chosen_seq: 0,
            first_tx_time: None,
            backoff_until: 0,
        })
        .collect();

    let window = u64::from(cfg.ra.ra_response_window_sf);
    let mut collisions: u64 = 0;
    let mut event_log: Vec<EventRecord> = Vec::new();
    let mut active = cfg.n_ues;

    for t in 0..cfg.sim_time_ms {
        if active == 0 {
            break;
        }
        let now = RadioTime::from_absolute_subframe(t);

        // Timeline transitions due now, in procedure order: contention
        // resolution completes, then RARs arrive, then RAR windows expire.
        for s in sessions.iter_mut() {
            match s.state {
                UeState::WaitingMsg4 { completes_at } if completes_at == t => {
                    let first = s.first_tx_time.expect("connected UEs have transmitted");
                    s.state = UeState::Connected { delay_ms: t - first };
                    active -= 1;
                }
                UeState::WaitingRar {
                    rar_at: Some(rar_at),
                    ..
                } if rar_at == t => {
                    s.state = UeState::WaitingMsg4 {
                        completes_at: t + cfg.timeline.msg3_delay_sf + cfg.timeline.msg4_delay_sf,
                    };
                }
                _ => {}
            }
        }
        for s in sessions.iter_mut() {
            if let UeState::WaitingRar {
                window_expires_at,
                rar_at: None,
            } = s.state
            {
                if window_expires_at == t {
                    s.attempt_no += 1;
                    if s.attempt_no > cfg.ra.preamble_trans_max {
                        s.state = UeState::Failed(FailureReason::AttemptsExhausted);
                        active -= 1;
                    } else {
                        let backoff =
                            u64::from(ue_rngs[s.ue_id].gen_range(0..=cfg.ra.backoff_max_sf));
                        s.backoff_until = t + backoff;
                        s.state = UeState::WaitingOpportunity;
                    }
                }
            }
        }

        // Preamble transmissions at every cell whose rule fires now.
        let cell_listening: Vec<bool> = rules
            .iter()
            .map(|rule| is_ra_opportunity(rule, now))
            .collect();
        if !cell_listening.iter().any(|&l| l) {
            continue;
        }
        let mut transmissions: Vec<PreambleTransmission> = Vec::new();
        for s in sessions.iter_mut() {
            if s.state != UeState::WaitingOpportunity
                || s.backoff_until > t
                || !cell_listening[s.serving_cell]
            {
                continue;
            }
            debug_assert!(is_ra_opportunity(&rules[s.serving_cell], now));
            let seq = ue_rngs[s.ue_id].gen_range(0..cfg.ra.num_ra_preambles);
            s.chosen_seq = seq;
            if s.first_tx_time.is_none() {
                s.first_tx_time = Some(t);
            }
            transmissions.push(PreambleTransmission {
                ue_id: s.ue_id,
                target_cell_id: s.serving_cell,
                preamble_seq: seq,
                attempt_no: s.attempt_no,
                tx_power_dbm: preamble_tx_power_dbm(&cfg.ra, s.attempt_no, pl_serving[s.ue_id]),
            });
        }
        if transmissions.is_empty() {
            continue;
        }

        let listening: Vec<&CellSite> = sites
            .iter()
            .filter(|s| cell_listening[s.id])
            .collect();
        let outcome = resolve_opportunity(&transmissions, &listening, &ues, &model);
        collisions += outcome.lost_preamble_count();
        for (&(cell_id, seq), bucket) in outcome.buckets() {
            event_log.push(EventRecord {
                time_sf: t,
                cell_id,
                preamble_seq: seq,
                outcome: bucket.clone(),
            });
        }

        for tx in &transmissions {
            let decoded =
                outcome.decoded_at(tx.target_cell_id, tx.preamble_seq) == Some(tx.ue_id);
            let rar_at = if decoded && cfg.timeline.rar_delay_sf <= window {
                Some(t + cfg.timeline.rar_delay_sf)
            } else {
                None
            };
            sessions[tx.ue_id].state = UeState::WaitingRar {
                window_expires_at: t + window,
                rar_at,
            };
        }
    }

    let mut delays_ms = Vec::new();
    let mut failed_ues = Vec::new();
    let mut flagged = false;
    for s in &sessions {
        match s.state {
            UeState::Connected { delay_ms } => delays_ms.push(delay_ms as f64),
            UeState::Failed(reason) => failed_ues.push((s.ue_id, reason)),
            _ => {
                failed_ues.push((s.ue_id, FailureReason::SimTimeExpired));
                flagged = true;
            }
        }
    }
    assert_eq!(
        delays_ms.len() + failed_ues.len(),
        cfg.n_ues,
        "every UE ends connected or failed"
    );

    Ok(RunResult {
        collisions,
        delays_ms,
        failed_ues,
        event_log,
        flagged,
    })
}

/// Recomputes the collision counter from an event log.
pub fn recount_collisions(event_log: &[EventRecord]) -> u64 {
    event_log.iter().map(|e| e.outcome.lost_count()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_ue_config() -> ScenarioConfig {
        ScenarioConfig {
            n_cells: 1,
            n_ues: 1,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn lone_ue_connects_at_timeline_sum() {
        // One UE, one cell: no contention, first preamble decoded, so the
        // delay is exactly rar + msg3 + msg4 = 13 ms.
        let cfg = one_ue_config();
        let result = run_scenario(&cfg, 7).unwrap();
        assert_eq!(result.collisions, 0);
        assert_eq!(result.delays_ms, vec![13.0]);
        assert!(result.failed_ues.is_empty());
        assert!(!result.flagged);
    }

    #[test]
    fn custom_timeline_shifts_delay() {
        let cfg = ScenarioConfig {
            timeline: MessageTimeline {
                rar_delay_sf: 2,
                msg3_delay_sf: 4,
                msg4_delay_sf: 3,
            },
            ..one_ue_config()
        };
        let result = run_scenario(&cfg, 7).unwrap();
        assert_eq!(result.delays_ms, vec![9.0]);
    }

    #[test]
    fn identical_seeds_reproduce_identical_runs() {
        let cfg = ScenarioConfig {
            n_cells: 2,
            n_ues: 40,
            scheme: Scheme::DifferentRows,
            ..ScenarioConfig::default()
        };
        let a = run_scenario(&cfg, 11).unwrap();
        let b = run_scenario(&cfg, 11).unwrap();
        assert_eq!(a.collisions, b.collisions);
        assert_eq!(a.delays_ms, b.delays_ms);
        assert_eq!(a.event_log, b.event_log);
        let c = run_scenario(&cfg, 12).unwrap();
        assert!(a.event_log != c.event_log || a.delays_ms != c.delays_ms);
    }

    #[test]
    fn conservation_and_ledger_hold_under_load() {
        let cfg = ScenarioConfig {
            n_cells: 2,
            n_ues: 120,
            ..ScenarioConfig::default()
        };
        let result = run_scenario(&cfg, 3).unwrap();
        assert_eq!(result.delays_ms.len() + result.failed_ues.len(), 120);
        assert_eq!(result.collisions, recount_collisions(&result.event_log));
        assert!(result.collisions > 0, "120 UEs on 2 cells must contend");
    }

    #[test]
    fn attempts_are_bounded_by_trans_max() {
        // Make success impossible: detection threshold above any arrival.
        let cfg = ScenarioConfig {
            n_cells: 1,
            n_ues: 3,
            detection_threshold_dbm: 60.0,
            sim_time_ms: 5000,
            ..ScenarioConfig::default()
        };
        let result = run_scenario(&cfg, 5).unwrap();
        assert!(result.delays_ms.is_empty());
        assert_eq!(result.failed_ues.len(), 3);
        for (_, reason) in &result.failed_ues {
            assert_eq!(*reason, FailureReason::AttemptsExhausted);
        }
        // Attempt waves: at most preamble_trans_max transmissions per UE.
        // With everything idle the event log is empty, so count nothing;
        // instead rerun with normal threshold but tiny trans_max.
        let cfg = ScenarioConfig {
            n_cells: 1,
            n_ues: 60,
            ra: RaParameters {
                preamble_trans_max: 2,
                num_ra_preambles: 4,
                ..RaParameters::default()
            },
            ..ScenarioConfig::default()
        };
        let result = run_scenario(&cfg, 5).unwrap();
        let mut per_ue: std::collections::BTreeMap<usize, u64> = Default::default();
        for e in &result.event_log {
            match &e.outcome {
                BucketOutcome::Detected(ue) => *per_ue.entry(*ue).or_default() += 1,
                BucketOutcome::Collided(ues) => {
                    for ue in ues {
                        *per_ue.entry(*ue).or_default() += 1;
                    }
                }
                _ => {}
            }
        }
        for (&ue, &n) in &per_ue {
            assert!(n <= 2, "UE {ue} appears in {n} buckets");
        }
    }

    #[test]
    fn short_sim_time_flags_run() {
        let cfg = ScenarioConfig {
            n_cells: 1,
            n_ues: 1,
            sim_time_ms: 5,
            ..ScenarioConfig::default()
        };
        let result = run_scenario(&cfg, 7).unwrap();
        assert!(result.flagged);
        assert_eq!(result.failed_ues, vec![(0, FailureReason::SimTimeExpired)]);
    }

    #[test]
    fn transmissions_only_at_opportunities() {
        // Index 1 fires at subframe 4 of even frames: every logged event
        // time must match that rule.
        let cfg = ScenarioConfig {
            n_cells: 2,
            n_ues: 80,
            ..ScenarioConfig::default()
        };
        let result = run_scenario(&cfg, 9).unwrap();
        assert!(!result.event_log.is_empty());
        for e in &result.event_log {
            assert_eq!(e.time_sf % 20, 4, "event at {}", e.time_sf);
        }
    }

    #[test]
    fn different_rows_uses_disjoint_subframes_in_two_cells() {
        let cfg = ScenarioConfig {
            n_cells: 2,
            n_ues: 80,
            scheme: Scheme::DifferentRows,
            ..ScenarioConfig::default()
        };
        let result = run_scenario(&cfg, 9).unwrap();
        for e in &result.event_log {
            let phase = e.time_sf % 20;
            let expected = if e.cell_id == 0 { 1 } else { 4 };
            assert_eq!(phase, expected, "cell {} at {}", e.cell_id, e.time_sf);
        }
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let cfg = ScenarioConfig {
            n_cells: 0,
            ..ScenarioConfig::default()
        };
        assert!(matches!(
            run_scenario(&cfg, 1),
            Err(EngineError::InvalidScenario(_)) | Err(EngineError::Topology(_))
        ));
        let cfg = ScenarioConfig {
            ra: RaParameters {
                num_ra_preambles: 0,
                ..RaParameters::default()
            },
            ..ScenarioConfig::default()
        };
        assert!(run_scenario(&cfg, 1).is_err());
    }

    #[test]
    fn ue_streams_differ() {
        let a = ue_stream_seed(1, 0);
        let b = ue_stream_seed(1, 1);
        let c = ue_stream_seed(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
