//! Path loss, preamble transmit power, and per-opportunity reception.
//!
//! Propagation is a log-distance model anchored at the 1 m free-space loss
//! for the carrier. Preamble transmit power follows open-loop control: the
//! initial target received power plus one ramping step per failed attempt,
//! compensated by the serving-cell path loss and capped at the UE maximum.
//! A cell detects every preamble arriving above its detection threshold no
//! matter which cell the sender targeted, so same-sequence arrivals from
//! different cells' UEs collide at any cell that hears them both.

use crate::prach::RaParameters;
use crate::topology::{link_distance_m, CellSite, UeNode};
use std::collections::BTreeMap;

/// UE power class ceiling for the preamble ramp.
pub const UE_MAX_TX_POWER_DBM: f64 = 23.0;

/// Log-distance exponent for urban macro deployments.
pub const URBAN_PATH_LOSS_EXPONENT: f64 = 3.76;

/// Receiver sensitivity for preamble detection. The open-loop ramp lands the
/// serving-cell arrival at the initial target power (-104 dBm by default),
/// and the detector keeps a 7 dB margin below that planning target, so
/// cell-edge UEs are also heard by nearby non-serving cells.
pub const DEFAULT_DETECTION_THRESHOLD_DBM: f64 = -111.0;

// Absorbs f64 rounding in tx_power - path_loss round trips so an arrival
// engineered to sit exactly at the threshold still counts as above it.
const RX_POWER_EPS_DB: f64 = 1e-9;

/// Log-distance path loss: reference loss at 1 m plus 10*exponent*log10(d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub reference_loss_db: f64,
    pub exponent: f64,
    pub carrier_hz: f64,
}

impl PathLossModel {
    /// Model anchored at the free-space loss 1 m from the transmitter.
    pub fn log_distance(carrier_hz: f64, exponent: f64) -> Self {
        PathLossModel {
            reference_loss_db: free_space_loss_at_1m_db(carrier_hz),
            exponent,
            carrier_hz,
        }
    }

    /// Loss in dB at `distance_m`; distances under 1 m clamp to the
    /// reference point.
    pub fn path_loss_db(&self, distance_m: f64) -> f64 {
        self.reference_loss_db + 10.0 * self.exponent * distance_m.max(1.0).log10()
    }
}

/// Free-space path loss at 1 m: 20*log10(f_hz) - 147.55.
pub fn free_space_loss_at_1m_db(carrier_hz: f64) -> f64 {
    20.0 * carrier_hz.log10() - 147.55
}

/// Open-loop preamble power for the given attempt (1-based), capped at the
/// UE maximum.
pub fn preamble_tx_power_dbm(params: &RaParameters, attempt_no: u32, pl_serving_db: f64) -> f64 {
    assert!(attempt_no >= 1, "attempts are 1-based");
    let ramp = f64::from(attempt_no - 1) * params.power_ramping_step_db;
    (params.preamble_initial_target_power_dbm + ramp + pl_serving_db).min(UE_MAX_TX_POWER_DBM)
}

/// One preamble sent during one opportunity.
#[derive(Debug, Clone, PartialEq)]
pub struct PreambleTransmission {
    pub ue_id: usize,
    pub target_cell_id: usize,
    pub preamble_seq: u16,
    pub attempt_no: u32,
    pub tx_power_dbm: f64,
}

/// Receiver configuration shared by all cells.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverModel {
    pub path_loss: PathLossModel,
    pub detection_threshold_dbm: f64,
    /// Power margin above the runner-up at which the strongest arrival in a
    /// contended bucket is still decodable. `None` means any contention
    /// destroys the whole bucket.
    pub capture_margin_db: Option<f64>,
}

/// What a cell concluded for one preamble sequence in one opportunity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BucketOutcome {
    /// No arrival above the detection threshold.
    Idle,
    /// Exactly one arrival: decoded.
    Detected(usize),
    /// Two or more arrivals, none decodable; UEs sorted ascending.
    Collided(Vec<usize>),
    /// Capture: the strongest arrival decoded, the rest lost.
    Captured { winner: usize, losers: Vec<usize> },
}

impl BucketOutcome {
    /// Preambles lost in this bucket.
    pub fn lost_count(&self) -> u64 {
        match self {
            BucketOutcome::Idle | BucketOutcome::Detected(_) => 0,
            BucketOutcome::Collided(ues) => ues.len() as u64,
            BucketOutcome::Captured { losers, .. } => losers.len() as u64,
        }
    }

    pub fn decoded_ue(&self) -> Option<usize> {
        match self {
            BucketOutcome::Detected(ue) | BucketOutcome::Captured { winner: ue, .. } => Some(*ue),
            _ => None,
        }
    }
}

/// Reception results for one opportunity, keyed by (cell id, sequence).
/// Idle buckets are not materialized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpportunityOutcome {
    buckets: BTreeMap<(usize, u16), BucketOutcome>,
}

impl OpportunityOutcome {
    pub fn outcome(&self, cell_id: usize, seq: u16) -> &BucketOutcome {
        static IDLE: BucketOutcome = BucketOutcome::Idle;
        self.buckets.get(&(cell_id, seq)).unwrap_or(&IDLE)
    }

    /// Non-idle buckets in (cell id, sequence) order.
    pub fn buckets(&self) -> impl Iterator<Item = (&(usize, u16), &BucketOutcome)> {
        self.buckets.iter()
    }

    /// Total preambles lost across all cells, counting a transmission once
    /// per cell whose bucket it congested.
    pub fn lost_preamble_count(&self) -> u64 {
        self.buckets.values().map(BucketOutcome::lost_count).sum()
    }

    pub fn decoded_at(&self, cell_id: usize, seq: u16) -> Option<usize> {
        self.outcome(cell_id, seq).decoded_ue()
    }
}

/// Resolves one opportunity: each listening cell buckets every transmission
/// it hears above threshold by sequence, regardless of the sender's target
/// cell, and each bucket resolves independently.
///
/// `ues` must be indexable by `ue_id`.
pub fn resolve_opportunity(
    transmissions: &[PreambleTransmission],
    listening_cells: &[&CellSite],
    ues: &[UeNode],
    model: &ReceiverModel,
) -> OpportunityOutcome {
    let mut arrivals: BTreeMap<(usize, u16), Vec<(usize, f64)>> = BTreeMap::new();
    for cell in listening_cells {
        for tx in transmissions {
            let ue = &ues[tx.ue_id];
            debug_assert_eq!(ue.id, tx.ue_id, "UE list must be indexed by id");
            let rx_dbm = tx.tx_power_dbm - model.path_loss.path_loss_db(link_distance_m(ue, cell));
            if rx_dbm >= model.detection_threshold_dbm - RX_POWER_EPS_DB {
                arrivals
                    .entry((cell.id, tx.preamble_seq))
                    .or_default()
                    .push((tx.ue_id, rx_dbm));
            }
        }
    }

    let mut outcome = OpportunityOutcome::default();
    for ((cell, seq), mut bucket) in arrivals {
        bucket.sort_by(|a, b| a.0.cmp(&b.0));
        let resolved = if bucket.len() == 1 {
            BucketOutcome::Detected(bucket[0].0)
        } else {
            match model.capture_margin_db {
                Some(margin) => {
                    let mut by_power = bucket.clone();
                    by_power.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                    if by_power[0].1 - by_power[1].1 >= margin {
                        let winner = by_power[0].0;
                        BucketOutcome::Captured {
                            winner,
                            losers: bucket
                                .iter()
                                .map(|&(ue, _)| ue)
                                .filter(|&ue| ue != winner)
                                .collect(),
                        }
                    } else {
                        BucketOutcome::Collided(bucket.iter().map(|&(ue, _)| ue).collect())
                    }
                }
                None => BucketOutcome::Collided(bucket.iter().map(|&(ue, _)| ue).collect()),
            }
        };
        outcome.buckets.insert((cell, seq), resolved);
    }
    outcome
}
