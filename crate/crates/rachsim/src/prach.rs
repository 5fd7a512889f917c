//! Radio frame timing and PRACH configuration index semantics.
//!
//! LTE counts time in 10 ms radio frames of ten 1 ms subframes, with the
//! system frame number (SFN) wrapping after 1024 frames. A cell's
//! PRACH-ConfigIndex selects one row of the FDD random access configuration
//! table: the preamble format, the frame parity during which preambles may be
//! sent, and the subframes within such frames that carry random access
//! opportunities.

use std::fmt;
use thiserror::Error;

/// Subframes per 10 ms radio frame.
pub const SUBFRAMES_PER_FRAME: u64 = 10;
/// System frame numbers run 0..1024 and then wrap.
pub const SFN_MODULUS: u64 = 1024;
/// Subframes in one full SFN cycle (10.24 s).
pub const SUBFRAMES_PER_CYCLE: u64 = SFN_MODULUS * SUBFRAMES_PER_FRAME;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrachError {
    #[error("PRACH-ConfigIndex {0} is out of range (valid indices are 0..=63)")]
    IndexOutOfRange(u32),
    #[error("PRACH-ConfigIndex {0} is reserved in the FDD configuration table")]
    ReservedIndex(u8),
    #[error("invalid random access parameters: {0}")]
    InvalidParameters(String),
}

// ===== Radio time =====

/// A (system frame, subframe) instant within one SFN wrap epoch.
///
/// Ordering is lexicographic on (sfn, subframe), which matches the
/// total-subframe order within an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadioTime {
    sfn: u16,
    subframe: u8,
}

impl RadioTime {
    /// Panics if `sfn` or `subframe` is outside its range; both bounds are
    /// structural invariants of LTE framing, not runtime conditions.
    pub fn new(sfn: u16, subframe: u8) -> Self {
        assert!(u64::from(sfn) < SFN_MODULUS, "sfn {sfn} out of range");
        assert!(
            u64::from(subframe) < SUBFRAMES_PER_FRAME,
            "subframe {subframe} out of range"
        );
        RadioTime { sfn, subframe }
    }

    /// Maps an unbounded absolute subframe counter onto the wrapping frame
    /// structure. The engine clock is such a counter, so wrap handling lives
    /// here and nowhere else.
    pub fn from_absolute_subframe(t: u64) -> Self {
        RadioTime {
            sfn: ((t / SUBFRAMES_PER_FRAME) % SFN_MODULUS) as u16,
            subframe: (t % SUBFRAMES_PER_FRAME) as u8,
        }
    }

    pub fn sfn(self) -> u16 {
        self.sfn
    }

    pub fn subframe(self) -> u8 {
        self.subframe
    }

    /// Position within the 10240-subframe SFN cycle.
    pub fn cycle_offset(self) -> u64 {
        u64::from(self.sfn) * SUBFRAMES_PER_FRAME + u64::from(self.subframe)
    }

    fn from_cycle_offset(offset: u64) -> Self {
        debug_assert!(offset < SUBFRAMES_PER_CYCLE);
        RadioTime {
            sfn: (offset / SUBFRAMES_PER_FRAME) as u16,
            subframe: (offset % SUBFRAMES_PER_FRAME) as u8,
        }
    }
}

impl fmt::Display for RadioTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sfn {} sf {}", self.sfn, self.subframe)
    }
}

// ===== Configuration index and occasion rules =====

/// Which system frames of a rule carry random access opportunities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameParity {
    Even,
    Odd,
    Any,
}

impl FrameParity {
    pub fn admits(self, sfn: u16) -> bool {
        match self {
            FrameParity::Even => sfn % 2 == 0,
            FrameParity::Odd => sfn % 2 == 1,
            FrameParity::Any => true,
        }
    }
}

/// A validated PRACH-ConfigIndex. Construction rejects values outside 0..=63
/// and the reserved rows of the FDD table, so every instance maps to a
/// concrete occasion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrachConfigIndex(u8);

impl PrachConfigIndex {
    pub fn new(raw: u32) -> Result<Self, PrachError> {
        if raw > 63 {
            return Err(PrachError::IndexOutOfRange(raw));
        }
        let raw = raw as u8;
        if FDD_PRACH_TABLE[raw as usize].is_none() {
            return Err(PrachError::ReservedIndex(raw));
        }
        Ok(PrachConfigIndex(raw))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for PrachConfigIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One row of the FDD random access configuration table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrachOccasionRule {
    pub format: u8,
    pub parity: FrameParity,
    /// Subframes carrying opportunities, sorted ascending, never empty.
    pub subframes: Vec<u8>,
}

type TableRow = (u8, FrameParity, &'static [u8]);

/// FDD random access configurations, indexed by PRACH-ConfigIndex.
/// `None` marks reserved rows. Four 16-row blocks, one per preamble format.
#[rustfmt::skip]
const FDD_PRACH_TABLE: [Option<TableRow>; 64] = [
    /* 0 */ Some((0, FrameParity::Even, &[1])),
    /* 1 */ Some((0, FrameParity::Even, &[4])),
    /* 2 */ Some((0, FrameParity::Even, &[7])),
    /* 3 */ Some((0, FrameParity::Any, &[1])),
    /* 4 */ Some((0, FrameParity::Any, &[4])),
    /* 5 */ Some((0, FrameParity::Any, &[7])),
    /* 6 */ Some((0, FrameParity::Any, &[1, 6])),
    /* 7 */ Some((0, FrameParity::Any, &[2, 7])),
    /* 8 */ Some((0, FrameParity::Any, &[3, 8])),
    /* 9 */ Some((0, FrameParity::Any, &[1, 4, 7])),
    /* 10 */ Some((0, FrameParity::Any, &[2, 5, 8])),
    /* 11 */ Some((0, FrameParity::Any, &[3, 6, 9])),
    /* 12 */ Some((0, FrameParity::Any, &[0, 2, 4, 6, 8])),
    /* 13 */ Some((0, FrameParity::Any, &[1, 3, 5, 7, 9])),
    /* 14 */ Some((0, FrameParity::Any, &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9])),
    /* 15 */ Some((0, FrameParity::Even, &[9])),
    /* 16 */ Some((1, FrameParity::Even, &[1])),
    /* 17 */ Some((1, FrameParity::Even, &[4])),
    /* 18 */ Some((1, FrameParity::Even, &[7])),
    /* 19 */ Some((1, FrameParity::Any, &[1])),
    /* 20 */ Some((1, FrameParity::Any, &[4])),
    /* 21 */ Some((1, FrameParity::Any, &[7])),
    /* 22 */ Some((1, FrameParity::Any, &[1, 6])),
    /* 23 */ Some((1, FrameParity::Any, &[2, 7])),
    /* 24 */ Some((1, FrameParity::Any, &[3, 8])),
    /* 25 */ Some((1, FrameParity::Any, &[1, 4, 7])),
    /* 26 */ Some((1, FrameParity::Any, &[2, 5, 8])),
    /* 27 */ Some((1, FrameParity::Any, &[3, 6, 9])),
    /* 28 */ Some((1, FrameParity::Any, &[0, 2, 4, 6, 8])),
    /* 29 */ Some((1, FrameParity::Any, &[1, 3, 5, 7, 9])),
    /* 30 */ None,
    /* 31 */ Some((1, FrameParity::Even, &[9])),
    /* 32 */ Some((2, FrameParity::Even, &[1])),
    /* 33 */ Some((2, FrameParity::Even, &[4])),
    /* 34 */ Some((2, FrameParity::Even, &[7])),
    /* 35 */ Some((2, FrameParity::Any, &[1])),
    /* 36 */ Some((2, FrameParity::Any, &[4])),
    /* 37 */ Some((2, FrameParity::Any, &[7])),
    /* 38 */ Some((2, FrameParity::Any, &[1, 6])),
    /* 39 */ Some((2, FrameParity::Any, &[2, 7])),
    /* 40 */ Some((2, FrameParity::Any, &[3, 8])),
    /* 41 */ Some((2, FrameParity::Any, &[1, 4, 7])),
    /* 42 */ Some((2, FrameParity::Any, &[2, 5, 8])),
    /* 43 */ Some((2, FrameParity::Any, &[3, 6, 9])),
    /* 44 */ Some((2, FrameParity::Any, &[0, 2, 4, 6, 8])),
    /* 45 */ Some((2, FrameParity::Any, &[1, 3, 5, 7, 9])),
    /* 46 */ None,
    /* 47 */ Some((2, FrameParity::Even, &[9])),
    /* 48 */ Some((3, FrameParity::Even, &[1])),
    /* 49 */ Some((3, FrameParity::Even, &[4])),
    /* 50 */ Some((3, FrameParity::Even, &[7])),
    /* 51 */ Some((3, FrameParity::Any, &[1])),
    /* 52 */ Some((3, FrameParity::Any, &[4])),
    /* 53 */ Some((3, FrameParity::Any, &[7])),
    /* 54 */ Some((3, FrameParity::Any, &[1, 6])),
    /* 55 */ Some((3, FrameParity::Any, &[2, 7])),
    /* 56 */ Some((3, FrameParity::Any, &[3, 8])),
    /* 57 */ Some((3, FrameParity::Any, &[1, 4, 7])),
    /* 58 */ Some((3, FrameParity::Any, &[2, 5, 8])),
    /* 59 */ Some((3, FrameParity::Any, &[3, 6, 9])),
    /* 60 */ None,
    /* 61 */ None,
    /* 62 */ None,
    /* 63 */ Some((3, FrameParity::Even, &[9])),
];

/// Looks up the occasion rule for a validated index. Total because reserved
/// indices cannot be constructed.
pub fn occasion_rule(index: PrachConfigIndex) -> PrachOccasionRule {
    let (format, parity, subframes) =
        FDD_PRACH_TABLE[index.value() as usize].expect("validated index maps to a table row");
    PrachOccasionRule {
        format,
        parity,
        subframes: subframes.to_vec(),
    }
}

/// Preamble format (0..=3) for a validated index.
pub fn format_of_index(index: PrachConfigIndex) -> u8 {
    occasion_rule(index).format
}

/// Whether `t` is a random access opportunity under `rule`.
pub fn is_ra_opportunity(rule: &PrachOccasionRule, t: RadioTime) -> bool {
    rule.parity.admits(t.sfn()) && rule.subframes.contains(&t.subframe())
}

/// First opportunity strictly after `after`, wrapping across the SFN cycle.
pub fn next_opportunity(rule: &PrachOccasionRule, after: RadioTime) -> RadioTime {
    let start = after.cycle_offset() + 1;
    for step in 0..SUBFRAMES_PER_CYCLE {
        let candidate = RadioTime::from_cycle_offset((start + step) % SUBFRAMES_PER_CYCLE);
        if is_ra_opportunity(rule, candidate) {
            return candidate;
        }
    }
    unreachable!("every table row has a nonempty subframe set, so an opportunity recurs")
}

// ===== Random access parameters =====

/// SIB2-style random access parameters used by the engine. Defaults follow
/// common commercial configurations; every field is overridable.
#[derive(Debug, Clone, PartialEq)]
pub struct RaParameters {
    pub num_ra_preambles: u16,
    pub power_ramping_step_db: f64,
    pub preamble_initial_target_power_dbm: f64,
    pub preamble_trans_max: u32,
    pub ra_response_window_sf: u32,
    pub contention_resolution_timer_sf: u32,
    pub backoff_max_sf: u32,
}

impl Default for RaParameters {
    fn default() -> Self {
        RaParameters {
            num_ra_preambles: 52,
            power_ramping_step_db: 2.0,
            preamble_initial_target_power_dbm: -104.0,
            preamble_trans_max: 10,
            ra_response_window_sf: 10,
            contention_resolution_timer_sf: 64,
            backoff_max_sf: 20,
        }
    }
}

impl RaParameters {
    pub fn validate(&self) -> Result<(), PrachError> {
        if self.num_ra_preambles == 0 {
            return Err(PrachError::InvalidParameters(
                "num_ra_preambles must be at least 1".into(),
            ));
        }
        if self.preamble_trans_max == 0 {
            return Err(PrachError::InvalidParameters(
                "preamble_trans_max must be at least 1".into(),
            ));
        }
        if self.ra_response_window_sf == 0 {
            return Err(PrachError::InvalidParameters(
                "ra_response_window_sf must be at least 1".into(),
            ));
        }
        if !self.power_ramping_step_db.is_finite()
            || !self.preamble_initial_target_power_dbm.is_finite()
        {
            return Err(PrachError::InvalidParameters(
                "power fields must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(raw: u32) -> PrachConfigIndex {
        PrachConfigIndex::new(raw).unwrap()
    }

    // Independent transcription of the table's block structure: four 16-row
    // blocks, one per format, sharing a position pattern. Positions 12 and 13
    // exist only for formats 0..=2, position 14 only for format 0.
    fn structural_row(index: u8) -> Option<(u8, FrameParity, Vec<u8>)> {
        let format = index / 16;
        let pos = index % 16;
        let pattern: Option<(FrameParity, Vec<u8>)> = match pos {
            0 => Some((FrameParity::Even, vec![1])),
            1 => Some((FrameParity::Even, vec![4])),
            2 => Some((FrameParity::Even, vec![7])),
            3 => Some((FrameParity::Any, vec![1])),
            4 => Some((FrameParity::Any, vec![4])),
            5 => Some((FrameParity::Any, vec![7])),
            6 => Some((FrameParity::Any, vec![1, 6])),
            7 => Some((FrameParity::Any, vec![2, 7])),
            8 => Some((FrameParity::Any, vec![3, 8])),
            9 => Some((FrameParity::Any, vec![1, 4, 7])),
            10 => Some((FrameParity::Any, vec![2, 5, 8])),
            11 => Some((FrameParity::Any, vec![3, 6, 9])),
            12 | 13 if format < 3 => Some((
                FrameParity::Any,
                if pos == 12 {
                    vec![0, 2, 4, 6, 8]
                } else {
                    vec![1, 3, 5, 7, 9]
                },
            )),
            14 if format == 0 => Some((FrameParity::Any, (0..10).collect())),
            15 => Some((FrameParity::Even, vec![9])),
            _ => None,
        };
        pattern.map(|(parity, sf)| (format, parity, sf))
    }

    #[test]
    fn table_matches_structural_transcription() {
        for raw in 0u8..64 {
            let structural = structural_row(raw);
            match PrachConfigIndex::new(u32::from(raw)) {
                Ok(index) => {
                    let rule = occasion_rule(index);
                    let (format, parity, subframes) =
                        structural.unwrap_or_else(|| panic!("index {raw} should be reserved"));
                    assert_eq!(rule.format, format, "format mismatch at {raw}");
                    assert_eq!(rule.parity, parity, "parity mismatch at {raw}");
                    assert_eq!(rule.subframes, subframes, "subframes mismatch at {raw}");
                }
                Err(PrachError::ReservedIndex(_)) => {
                    assert!(structural.is_none(), "index {raw} should be defined");
                }
                Err(e) => panic!("unexpected error for {raw}: {e}"),
            }
        }
    }

    #[test]
    fn single_subframe_even_frame_rules() {
        let expect = [(0u32, 1u8), (1, 4), (2, 7), (15, 9)];
        for (raw, subframe) in expect {
            let rule = occasion_rule(idx(raw));
            assert_eq!(rule.format, 0);
            assert_eq!(rule.parity, FrameParity::Even);
            assert_eq!(rule.subframes, vec![subframe]);
        }
    }

    #[test]
    fn formats_by_block() {
        assert_eq!(format_of_index(idx(1)), 0);
        assert_eq!(format_of_index(idx(18)), 1);
        assert_eq!(format_of_index(idx(34)), 2);
        assert_eq!(format_of_index(idx(50)), 3);
        assert_eq!(format_of_index(idx(63)), 3);
    }

    #[test]
    fn reserved_and_out_of_range_rejected() {
        for raw in [30u32, 46, 60, 61, 62] {
            assert_eq!(
                PrachConfigIndex::new(raw),
                Err(PrachError::ReservedIndex(raw as u8))
            );
        }
        assert_eq!(PrachConfigIndex::new(64), Err(PrachError::IndexOutOfRange(64)));
        assert_eq!(
            PrachConfigIndex::new(1000),
            Err(PrachError::IndexOutOfRange(1000))
        );
    }

    #[test]
    fn next_opportunity_worked_examples() {
        let rule1 = occasion_rule(idx(1));
        assert_eq!(
            next_opportunity(&rule1, RadioTime::new(0, 0)),
            RadioTime::new(0, 4)
        );
        assert_eq!(
            next_opportunity(&rule1, RadioTime::new(0, 4)),
            RadioTime::new(2, 4)
        );
        let rule15 = occasion_rule(idx(15));
        assert_eq!(
            next_opportunity(&rule15, RadioTime::new(1, 0)),
            RadioTime::new(2, 9)
        );
    }

    #[test]
    fn twenty_subframe_period_across_wrap() {
        for raw in [0u32, 1, 2, 15] {
            let rule = occasion_rule(idx(raw));
            // Start just before the wrap so the 1023 -> 0 transition is
            // crossed early and then repeatedly over 1500 gaps.
            let mut current = next_opportunity(&rule, RadioTime::new(1022, 9));
            for _ in 0..1500 {
                let next = next_opportunity(&rule, current);
                let gap = (next.cycle_offset() + SUBFRAMES_PER_CYCLE - current.cycle_offset())
                    % SUBFRAMES_PER_CYCLE;
                assert_eq!(gap, 20, "index {raw}: gap {gap} between {current} and {next}");
                current = next;
            }
        }
    }

    #[test]
    fn no_opportunity_skipped_within_cycle() {
        // Exhaustive gap check: nothing matches strictly between a time and
        // its successor, for a single-subframe rule and a dense rule.
        for raw in [15u32, 9] {
            let rule = occasion_rule(idx(raw));
            for offset in 0..SUBFRAMES_PER_CYCLE {
                let t = RadioTime::from_absolute_subframe(offset);
                let next = next_opportunity(&rule, t);
                let gap = (next.cycle_offset() + SUBFRAMES_PER_CYCLE - t.cycle_offset())
                    % SUBFRAMES_PER_CYCLE;
                for step in 1..gap {
                    let between = RadioTime::from_cycle_offset(
                        (t.cycle_offset() + step) % SUBFRAMES_PER_CYCLE,
                    );
                    assert!(!is_ra_opportunity(&rule, between));
                }
            }
        }
    }

    #[test]
    fn absolute_subframe_mapping_wraps() {
        let t = RadioTime::from_absolute_subframe(10_239);
        assert_eq!((t.sfn(), t.subframe()), (1023, 9));
        let t = RadioTime::from_absolute_subframe(10_240);
        assert_eq!((t.sfn(), t.subframe()), (0, 0));
        let t = RadioTime::from_absolute_subframe(3 * SUBFRAMES_PER_CYCLE + 47);
        assert_eq!((t.sfn(), t.subframe()), (4, 7));
    }

    #[test]
    fn ordering_matches_cycle_offset() {
        let a = RadioTime::new(5, 9);
        let b = RadioTime::new(6, 0);
        assert!(a < b);
        assert!(a.cycle_offset() < b.cycle_offset());
    }

    #[test]
    fn default_parameters_validate() {
        let p = RaParameters::default();
        assert_eq!(p.num_ra_preambles, 52);
        assert_eq!(p.preamble_trans_max, 10);
        assert_eq!(p.backoff_max_sf, 20);
        p.validate().unwrap();

        let bad = RaParameters {
            num_ra_preambles: 0,
            ..RaParameters::default()
        };
        assert!(bad.validate().is_err());
    }
}
