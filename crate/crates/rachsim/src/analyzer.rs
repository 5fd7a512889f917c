//! Ingest and analysis of tabular SIB2 capture records.
//!
//! Input is a CSV of per-cell SIB2 snapshots (one row per observed cell,
//! identified by location, operator, carrier, and cell id). Three analyses
//! are provided:
//!
//! 1. collision risk: how often co-located cells of one operator share a
//!    carrier and a PRACH-ConfigIndex, grouped and histogrammed;
//! 2. preamble format usage split by area class;
//! 3. the number of unique values each random-access IE takes, optionally
//!    per country or per operator.
//!
//! All analyses are pure functions of the record list. A deterministic
//! synthetic fixture generator stands in for real captures, which are not
//! distributable.

use crate::prach::{format_of_index, PrachConfigIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("cannot read records: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("row {row}: {reason}")]
    Ingest { row: usize, reason: String },
}

/// Coarse classification of the capture location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AreaClass {
    Urban,
    Suburban,
    Rural,
}

impl AreaClass {
    pub fn parse(s: &str) -> Option<AreaClass> {
        match s.to_ascii_lowercase().as_str() {
            "urban" => Some(AreaClass::Urban),
            "suburban" => Some(AreaClass::Suburban),
            "rural" => Some(AreaClass::Rural),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AreaClass::Urban => "urban",
            AreaClass::Suburban => "suburban",
            AreaClass::Rural => "rural",
        }
    }

    pub const ALL: [AreaClass; 3] = [AreaClass::Urban, AreaClass::Suburban, AreaClass::Rural];
}

/// One captured cell: identity columns plus the random-access IEs of its
/// SIB2 broadcast.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub country: String,
    pub mno: String,
    pub location_id: String,
    pub area_class: AreaClass,
    pub band: u16,
    pub earfcn: u32,
    pub enodeb_id: u64,
    pub cell_id: u64,
    /// 0..=63; reserved values are accepted at ingest and handled by the
    /// analyses that need a defined preamble format.
    pub prach_config_index: u8,
    pub num_ra_preambles: u16,
    pub power_ramping_step_db: f64,
    pub preamble_initial_target_power_dbm: f64,
    pub preamble_trans_max: u32,
    pub ra_response_window_sf: u32,
    pub contention_resolution_timer_sf: u32,
    pub highspeed_flag: bool,
    pub zero_correlation_zone_config: u8,
    pub prach_freq_offset: u8,
}

/// Column names of the record schema, in file order.
pub const RECORD_COLUMNS: [&str; 18] = [
    "country",
    "mno",
    "location_id",
    "area_class",
    "band",
    "earfcn",
    "enodeb_id",
    "cell_id",
    "prach_config_index",
    "num_ra_preambles",
    "power_ramping_step_db",
    "preamble_initial_target_power_dbm",
    "preamble_trans_max",
    "ra_response_window_sf",
    "contention_resolution_timer_sf",
    "highspeed_flag",
    "zero_correlation_zone_config",
    "prach_freq_offset",
];

/// The SIB2 random-access IEs, in the order insight tables list them.
pub const IE_COLUMNS: [&str; 10] = [
    "num_ra_preambles",
    "power_ramping_step_db",
    "preamble_initial_target_power_dbm",
    "preamble_trans_max",
    "ra_response_window_sf",
    "contention_resolution_timer_sf",
    "prach_config_index",
    "highspeed_flag",
    "zero_correlation_zone_config",
    "prach_freq_offset",
];

/// Canonical string form of one IE value, used for distinct counting.
fn ie_value_string(record: &MeasurementRecord, ie: &str) -> String {
    match ie {
        "num_ra_preambles" => record.num_ra_preambles.to_string(),
        "power_ramping_step_db" => record.power_ramping_step_db.to_string(),
        "preamble_initial_target_power_dbm" => {
            record.preamble_initial_target_power_dbm.to_string()
        }
        "preamble_trans_max" => record.preamble_trans_max.to_string(),
        "ra_response_window_sf" => record.ra_response_window_sf.to_string(),
        "contention_resolution_timer_sf" => record.contention_resolution_timer_sf.to_string(),
        "prach_config_index" => record.prach_config_index.to_string(),
        "highspeed_flag" => record.highspeed_flag.to_string(),
        "zero_correlation_zone_config" => record.zero_correlation_zone_config.to_string(),
        "prach_freq_offset" => record.prach_freq_offset.to_string(),
        other => unreachable!("unknown IE column {other}"),
    }
}

// ===== Ingest =====

/// Outcome of loading a records file.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub records: Vec<MeasurementRecord>,
    /// Rows dropped because an earlier row had the same
    /// (location_id, mno, earfcn, cell_id).
    pub duplicates_dropped: usize,
    /// Header columns outside the schema, ignored.
    pub extra_columns: Vec<String>,
}

fn ingest_err(row: usize, reason: impl Into<String>) -> AnalyzerError {
    AnalyzerError::Ingest {
        row,
        reason: reason.into(),
    }
}

fn field<'a>(
    record: &'a csv::StringRecord,
    cols: &BTreeMap<&'static str, usize>,
    name: &'static str,
    row: usize,
) -> Result<&'a str, AnalyzerError> {
    let idx = cols[name];
    record
        .get(idx)
        .ok_or_else(|| ingest_err(row, format!("missing value for column '{name}'")))
}

fn parse_col<T: std::str::FromStr>(
    record: &csv::StringRecord,
    cols: &BTreeMap<&'static str, usize>,
    name: &'static str,
    row: usize,
) -> Result<T, AnalyzerError>
where
    T::Err: std::fmt::Display,
{
    let raw = field(record, cols, name, row)?;
    raw.parse()
        .map_err(|e| ingest_err(row, format!("bad value '{raw}' for column '{name}': {e}")))
}

fn parse_bool(
    record: &csv::StringRecord,
    cols: &BTreeMap<&'static str, usize>,
    name: &'static str,
    row: usize,
) -> Result<bool, AnalyzerError> {
    let raw = field(record, cols, name, row)?;
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(ingest_err(
            row,
            format!("bad value '{raw}' for column '{name}': expected true or false"),
        )),
    }
}

/// Parses records from a CSV stream. The header must contain every schema
/// column by exact name; extra columns are reported and skipped. Duplicate
/// (location_id, mno, earfcn, cell_id) rows keep the first occurrence. Row
/// numbers in errors count data rows from 1, excluding the header.
pub fn load_records_from_reader<R: io::Read>(reader: R) -> Result<IngestReport, AnalyzerError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();

    let mut cols: BTreeMap<&'static str, usize> = BTreeMap::new();
    for name in RECORD_COLUMNS {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AnalyzerError::MissingColumn(name.to_string()))?;
        cols.insert(name, idx);
    }
    let known: BTreeSet<usize> = cols.values().copied().collect();
    let extra_columns: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !known.contains(i))
        .map(|(_, h)| h.to_string())
        .collect();

    let mut records = Vec::new();
    let mut seen: BTreeSet<(String, String, u32, u64)> = BTreeSet::new();
    let mut duplicates_dropped = 0;
    for (i, row_result) in csv_reader.records().enumerate() {
        let row = i + 1;
        let raw = row_result?;

        let area_raw = field(&raw, &cols, "area_class", row)?;
        let area_class = AreaClass::parse(area_raw).ok_or_else(|| {
            ingest_err(
                row,
                format!("bad value '{area_raw}' for column 'area_class': expected urban, suburban, or rural"),
            )
        })?;
        let prach_config_index: u8 = parse_col(&raw, &cols, "prach_config_index", row)?;
        if prach_config_index > 63 {
            return Err(ingest_err(
                row,
                format!("prach_config_index {prach_config_index} out of range 0..=63"),
            ));
        }

        let record = MeasurementRecord {
            country: field(&raw, &cols, "country", row)?.to_string(),
            mno: field(&raw, &cols, "mno", row)?.to_string(),
            location_id: field(&raw, &cols, "location_id", row)?.to_string(),
            area_class,
            band: parse_col(&raw, &cols, "band", row)?,
            earfcn: parse_col(&raw, &cols, "earfcn", row)?,
            enodeb_id: parse_col(&raw, &cols, "enodeb_id", row)?,
            cell_id: parse_col(&raw, &cols, "cell_id", row)?,
            prach_config_index,
            num_ra_preambles: parse_col(&raw, &cols, "num_ra_preambles", row)?,
            power_ramping_step_db: parse_col(&raw, &cols, "power_ramping_step_db", row)?,
            preamble_initial_target_power_dbm: parse_col(
                &raw,
                &cols,
                "preamble_initial_target_power_dbm",
                row,
            )?,
            preamble_trans_max: parse_col(&raw, &cols, "preamble_trans_max", row)?,
            ra_response_window_sf: parse_col(&raw, &cols, "ra_response_window_sf", row)?,
            contention_resolution_timer_sf: parse_col(
                &raw,
                &cols,
                "contention_resolution_timer_sf",
                row,
            )?,
            highspeed_flag: parse_bool(&raw, &cols, "highspeed_flag", row)?,
            zero_correlation_zone_config: parse_col(
                &raw,
                &cols,
                "zero_correlation_zone_config",
                row,
            )?,
            prach_freq_offset: parse_col(&raw, &cols, "prach_freq_offset", row)?,
        };

        let key = (
            record.location_id.clone(),
            record.mno.clone(),
            record.earfcn,
            record.cell_id,
        );
        if seen.insert(key) {
            records.push(record);
        } else {
            duplicates_dropped += 1;
        }
    }
    Ok(IngestReport {
        records,
        duplicates_dropped,
        extra_columns,
    })
}

pub fn load_records(path: &Path) -> Result<IngestReport, AnalyzerError> {
    let file = std::fs::File::open(path)?;
    load_records_from_reader(file)
}

/// Writes records in schema order; floats use the shortest representation
/// that round-trips.
pub fn write_records_csv(path: &Path, records: &[MeasurementRecord]) -> Result<(), AnalyzerError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.country.clone(),
            r.mno.clone(),
            r.location_id.clone(),
            r.area_class.as_str().to_string(),
            r.band.to_string(),
            r.earfcn.to_string(),
            r.enodeb_id.to_string(),
            r.cell_id.to_string(),
            r.prach_config_index.to_string(),
            r.num_ra_preambles.to_string(),
            r.power_ramping_step_db.to_string(),
            r.preamble_initial_target_power_dbm.to_string(),
            r.preamble_trans_max.to_string(),
            r.ra_response_window_sf.to_string(),
            r.contention_resolution_timer_sf.to_string(),
            r.highspeed_flag.to_string(),
            r.zero_correlation_zone_config.to_string(),
            r.prach_freq_offset.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ===== Insight 1: collision risk =====

/// One histogram bin: the cells of an operator at one location and carrier
/// announcing the same index form a group of `group_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeBin {
    pub group_size: usize,
    pub group_count: usize,
    /// Fraction of all groups that have this size.
    pub share_of_groups: f64,
    /// Fraction of locations containing at least one group of this size.
    pub share_of_locations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionRiskReport {
    /// Bins sorted by ascending group size.
    pub bins: Vec<SizeBin>,
    pub n_groups: usize,
    pub n_locations: usize,
    /// Fraction of locations containing any group of size >= 2, i.e. with
    /// co-located same-operator cells sharing carrier and index.
    pub at_risk_location_fraction: f64,
}

/// Groups records by (location_id, mno, earfcn, prach_config_index) and
/// histograms the group sizes. Both normalizations are emitted: by group
/// count and by location count.
pub fn collision_risk_histogram(records: &[MeasurementRecord]) -> CollisionRiskReport {
    let mut groups: BTreeMap<(&str, &str, u32, u8), usize> = BTreeMap::new();
    let mut locations: BTreeSet<&str> = BTreeSet::new();
    for r in records {
        *groups
            .entry((&r.location_id, &r.mno, r.earfcn, r.prach_config_index))
            .or_default() += 1;
        locations.insert(&r.location_id);
    }

    let mut size_to_count: BTreeMap<usize, usize> = BTreeMap::new();
    let mut size_to_locations: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
    let mut at_risk: BTreeSet<&str> = BTreeSet::new();
    for (&(location, _, _, _), &size) in &groups {
        *size_to_count.entry(size).or_default() += 1;
        size_to_locations.entry(size).or_default().insert(location);
        if size >= 2 {
            at_risk.insert(location);
        }
    }

    let n_groups = groups.len();
    let n_locations = locations.len();
    let bins = size_to_count
        .iter()
        .map(|(&group_size, &group_count)| SizeBin {
            group_size,
            group_count,
            share_of_groups: group_count as f64 / n_groups as f64,
            share_of_locations: size_to_locations[&group_size].len() as f64
                / n_locations as f64,
        })
        .collect();
    CollisionRiskReport {
        bins,
        n_groups,
        n_locations,
        at_risk_location_fraction: if n_locations == 0 {
            0.0
        } else {
            at_risk.len() as f64 / n_locations as f64
        },
    }
}

// ===== Insight 2: preamble format usage =====

#[derive(Debug, Clone, PartialEq)]
pub struct FormatUsageRow {
    pub area_class: AreaClass,
    pub format: u8,
    pub count: usize,
    /// Share within the area class, over records with a defined format.
    pub share: f64,
}

/// A record skipped by the format analysis because its index is reserved.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedRecord {
    pub location_id: String,
    pub mno: String,
    pub cell_id: u64,
    pub prach_config_index: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormatUsageReport {
    /// Rows ordered urban, suburban, rural, then by format; empty classes
    /// are absent.
    pub rows: Vec<FormatUsageRow>,
    pub excluded_reserved: Vec<ExcludedRecord>,
}

/// Counts preamble formats per area class. Records whose index is reserved
/// have no format; they are excluded from the shares and reported.
pub fn format_usage_by_area(records: &[MeasurementRecord]) -> FormatUsageReport {
    let mut counts: BTreeMap<(AreaClass, u8), usize> = BTreeMap::new();
    let mut class_totals: BTreeMap<AreaClass, usize> = BTreeMap::new();
    let mut excluded_reserved = Vec::new();
    for r in records {
        match PrachConfigIndex::new(u32::from(r.prach_config_index)) {
            Ok(index) => {
                let format = format_of_index(index);
                *counts.entry((r.area_class, format)).or_default() += 1;
                *class_totals.entry(r.area_class).or_default() += 1;
            }
            Err(_) => excluded_reserved.push(ExcludedRecord {
                location_id: r.location_id.clone(),
                mno: r.mno.clone(),
                cell_id: r.cell_id,
                prach_config_index: r.prach_config_index,
            }),
        }
    }
    let rows = counts
        .iter()
        .map(|(&(area_class, format), &count)| FormatUsageRow {
            area_class,
            format,
            count,
            share: count as f64 / class_totals[&area_class] as f64,
        })
        .collect();
    FormatUsageReport {
        rows,
        excluded_reserved,
    }
}

// ===== Insight 3: unique IE values =====

/// Grouping key for the unique-value counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Country,
    Mno,
}

impl GroupBy {
    pub fn parse(s: &str) -> Option<GroupBy> {
        match s.to_ascii_lowercase().as_str() {
            "country" => Some(GroupBy::Country),
            "mno" => Some(GroupBy::Mno),
            _ => None,
        }
    }

    pub fn column_name(&self) -> &'static str {
        match self {
            GroupBy::Country => "country",
            GroupBy::Mno => "mno",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniqueIeRow {
    /// Group value; `None` when ungrouped.
    pub group: Option<String>,
    pub ie_name: &'static str,
    pub unique_values: usize,
}

/// Counts distinct observed values per random-access IE, over all records
/// or within each group. Rows are ordered by group, then IE list order.
pub fn unique_ie_value_counts(
    records: &[MeasurementRecord],
    group_by: Option<GroupBy>,
) -> Vec<UniqueIeRow> {
    let group_of = |r: &MeasurementRecord| -> Option<String> {
        group_by.map(|g| match g {
            GroupBy::Country => r.country.clone(),
            GroupBy::Mno => r.mno.clone(),
        })
    };
    let mut groups: BTreeSet<Option<String>> = BTreeSet::new();
    for r in records {
        groups.insert(group_of(r));
    }
    if group_by.is_none() && records.is_empty() {
        groups.insert(None);
    }

    let mut rows = Vec::new();
    for group in groups {
        for ie in IE_COLUMNS {
            let mut values: BTreeSet<String> = BTreeSet::new();
            for r in records {
                if group_of(r) == group {
                    values.insert(ie_value_string(r, ie));
                }
            }
            rows.push(UniqueIeRow {
                group: group.clone(),
                ie_name: ie,
                unique_values: values.len(),
            });
        }
    }
    rows
}

// ===== Insight CSV output =====

pub fn write_histogram_csv(path: &Path, report: &CollisionRiskReport) -> Result<(), AnalyzerError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "group_size",
        "group_count",
        "share_of_groups",
        "share_of_locations",
        "at_risk_location_fraction",
    ])?;
    for bin in &report.bins {
        w.write_record([
            bin.group_size.to_string(),
            bin.group_count.to_string(),
            bin.share_of_groups.to_string(),
            bin.share_of_locations.to_string(),
            report.at_risk_location_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_formats_csv(path: &Path, report: &FormatUsageReport) -> Result<(), AnalyzerError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["area_class", "format", "count", "share"])?;
    for row in &report.rows {
        w.write_record([
            row.area_class.as_str().to_string(),
            row.format.to_string(),
            row.count.to_string(),
            row.share.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The group column (named after the grouping key) is present only when
/// grouping was requested.
pub fn write_unique_ies_csv(
    path: &Path,
    rows: &[UniqueIeRow],
    group_by: Option<GroupBy>,
) -> Result<(), AnalyzerError> {
    let mut w = csv::Writer::from_path(path)?;
    match group_by {
        Some(g) => {
            w.write_record([g.column_name(), "ie", "unique_values"])?;
            for row in rows {
                w.write_record([
                    row.group.clone().unwrap_or_default(),
                    row.ie_name.to_string(),
                    row.unique_values.to_string(),
                ])?;
            }
        }
        None => {
            w.write_record(["ie", "unique_values"])?;
            for row in rows {
                w.write_record([row.ie_name.to_string(), row.unique_values.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

// ===== Synthetic fixture =====

/// Generates a deterministic synthetic capture: 3 countries, 12 locations
/// each, 3 operators per country. Two thirds of the locations contain an
/// operator announcing the same index on two co-located same-carrier cells;
/// format 0 dominates; response-window values are nearly constant within a
/// country. The output resembles real capture statistics but is entirely
/// fabricated.
pub fn synthetic_records(seed: u64) -> Vec<MeasurementRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let countries = ["synthA", "synthB", "synthC"];
    // Mostly format 0 (indices 1..=5), some format 1 (16, 18).
    let index_pool: [u8; 7] = [1, 2, 3, 4, 5, 16, 18];

    let mut records = Vec::new();
    let mut next_enodeb: u64 = 100;
    for (ci, country) in countries.iter().enumerate() {
        let carriers = [
            (17u16, 5780 + 10 * ci as u32),
            (3u16, 1275 + 10 * ci as u32),
        ];
        for li in 0..12 {
            let location_id = format!("{country}-loc{li:02}");
            let area_class = match li % 6 {
                5 => AreaClass::Rural,
                2 => AreaClass::Suburban,
                _ => AreaClass::Urban,
            };
            // Two thirds of the locations carry a same-index pair.
            let with_pair = li < 8;
            for mi in 0..3usize {
                let mno = format!("{country}-op{}", mi + 1);
                let (band, earfcn) = carriers[mi % 2];
                let enodeb_id = next_enodeb;
                next_enodeb += 1;

                let indices: Vec<u8> = if with_pair && mi == 0 {
                    // The duplicated pair, optionally with one extra cell on
                    // a distinct index.
                    let mut v = vec![1, 1];
                    if rng.gen_bool(0.5) {
                        v.push(*[3u8, 5].choose(&mut rng).unwrap());
                    }
                    v
                } else {
                    let mut pool = index_pool.to_vec();
                    pool.shuffle(&mut rng);
                    let n = rng.gen_range(1..=3);
                    pool.truncate(n);
                    pool
                };

                for (cell_no, &prach_config_index) in indices.iter().enumerate() {
                    let ra_response_window_sf = match ci {
                        0 => 10,
                        1 => {
                            if li % 2 == 0 {
                                10
                            } else {
                                8
                            }
                        }
                        _ => 8,
                    };
                    records.push(MeasurementRecord {
                        country: country.to_string(),
                        mno: mno.clone(),
                        location_id: location_id.clone(),
                        area_class,
                        band,
                        earfcn,
                        enodeb_id,
                        cell_id: enodeb_id * 256 + cell_no as u64,
                        prach_config_index,
                        num_ra_preambles: if mi == 2 { 48 } else { 52 },
                        power_ramping_step_db: if ci == 2 && mi == 2 { 4.0 } else { 2.0 },
                        preamble_initial_target_power_dbm: if ci == 1 && mi == 1 {
                            -100.0
                        } else {
                            -104.0
                        },
                        preamble_trans_max: if ci == 2 && mi == 1 { 6 } else { 10 },
                        ra_response_window_sf,
                        contention_resolution_timer_sf: if ci == 1 && mi == 0 { 48 } else { 64 },
                        highspeed_flag: ci == 0 && li == 0 && mi == 0,
                        zero_correlation_zone_config: rng.gen_range(5..=12),
                        prach_freq_offset: rng.gen_range(0..=6),
                    });
                }
            }
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_record() -> MeasurementRecord {
        MeasurementRecord {
            country: "synthA".into(),
            mno: "synthA-op1".into(),
            location_id: "synthA-loc00".into(),
            area_class: AreaClass::Urban,
            band: 17,
            earfcn: 5780,
            enodeb_id: 1,
            cell_id: 256,
            prach_config_index: 1,
            num_ra_preambles: 52,
            power_ramping_step_db: 2.0,
            preamble_initial_target_power_dbm: -104.0,
            preamble_trans_max: 10,
            ra_response_window_sf: 10,
            contention_resolution_timer_sf: 64,
            highspeed_flag: false,
            zero_correlation_zone_config: 5,
            prach_freq_offset: 0,
        }
    }

    fn rec(location: &str, mno: &str, earfcn: u32, cell_id: u64, index: u8) -> MeasurementRecord {
        MeasurementRecord {
            location_id: location.into(),
            mno: mno.into(),
            earfcn,
            cell_id,
            prach_config_index: index,
            ..base_record()
        }
    }

    fn header_line() -> String {
        RECORD_COLUMNS.join(",")
    }

    fn record_line(r: &MeasurementRecord) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.country,
            r.mno,
            r.location_id,
            r.area_class.as_str(),
            r.band,
            r.earfcn,
            r.enodeb_id,
            r.cell_id,
            r.prach_config_index,
            r.num_ra_preambles,
            r.power_ramping_step_db,
            r.preamble_initial_target_power_dbm,
            r.preamble_trans_max,
            r.ra_response_window_sf,
            r.contention_resolution_timer_sf,
            r.highspeed_flag,
            r.zero_correlation_zone_config,
            r.prach_freq_offset
        )
    }

    #[test]
    fn empty_body_loads_as_empty_list() {
        let text = header_line() + "\n";
        let report = load_records_from_reader(text.as_bytes()).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.duplicates_dropped, 0);
        assert!(report.extra_columns.is_empty());
    }

    #[test]
    fn records_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let records = synthetic_records(3);
        write_records_csv(&path, &records).unwrap();
        let report = load_records(&path).unwrap();
        assert_eq!(report.records, records);
        assert_eq!(report.duplicates_dropped, 0);
    }

    #[test]
    fn missing_column_is_rejected() {
        let text = "country,mno\nsynthA,op1\n";
        match load_records_from_reader(text.as_bytes()) {
            Err(AnalyzerError::MissingColumn(col)) => assert_eq!(col, "location_id"),
            other => panic!("expected missing column, got {other:?}"),
        }
    }

    #[test]
    fn extra_columns_are_reported_and_ignored() {
        let text = format!(
            "{},notes\n{},hello\n",
            header_line(),
            record_line(&base_record())
        );
        let report = load_records_from_reader(text.as_bytes()).unwrap();
        assert_eq!(report.extra_columns, vec!["notes".to_string()]);
        assert_eq!(report.records, vec![base_record()]);
    }

    #[test]
    fn ingest_errors_carry_data_row_numbers() {
        let good = record_line(&base_record());
        let bad = record_line(&base_record()).replace("urban", "downtown");
        let text = format!("{}\n{good}\n{bad}\n", header_line());
        match load_records_from_reader(text.as_bytes()) {
            Err(AnalyzerError::Ingest { row, reason }) => {
                assert_eq!(row, 2);
                assert!(reason.contains("area_class"), "{reason}");
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let bad = rec("l", "m", 1, 1, 63);
        let mut line = record_line(&bad);
        line = line.replace(",63,", ",64,");
        let text = format!("{}\n{line}\n", header_line());
        match load_records_from_reader(text.as_bytes()) {
            Err(AnalyzerError::Ingest { row, reason }) => {
                assert_eq!(row, 1);
                assert!(reason.contains("out of range"), "{reason}");
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
        // A reserved index inside the range is accepted at ingest.
        let reserved = rec("l", "m", 1, 1, 46);
        let text = format!("{}\n{}\n", header_line(), record_line(&reserved));
        let report = load_records_from_reader(text.as_bytes()).unwrap();
        assert_eq!(report.records.len(), 1);
    }

    #[test]
    fn duplicate_cells_keep_first_row() {
        let first = rec("l", "m", 5780, 1, 1);
        let mut second = rec("l", "m", 5780, 1, 3);
        second.num_ra_preambles = 48;
        let text = format!(
            "{}\n{}\n{}\n",
            header_line(),
            record_line(&first),
            record_line(&second)
        );
        let report = load_records_from_reader(text.as_bytes()).unwrap();
        assert_eq!(report.duplicates_dropped, 1);
        assert_eq!(report.records, vec![first]);
    }

    #[test]
    fn histogram_groups_by_location_mno_carrier_index() {
        // Three cells at one location/carrier with indices {1, 1, 3}:
        // one group of two, one group of one.
        let records = vec![
            rec("l", "m", 5780, 1, 1),
            rec("l", "m", 5780, 2, 1),
            rec("l", "m", 5780, 3, 3),
        ];
        let report = collision_risk_histogram(&records);
        assert_eq!(report.n_groups, 2);
        assert_eq!(report.n_locations, 1);
        assert_eq!(report.bins.len(), 2);
        assert_eq!(report.bins[0].group_size, 1);
        assert_eq!(report.bins[0].group_count, 1);
        assert_eq!(report.bins[1].group_size, 2);
        assert_eq!(report.bins[1].group_count, 1);
        assert_eq!(report.at_risk_location_fraction, 1.0);
    }

    #[test]
    fn distinct_indices_mean_no_risk() {
        let records = vec![
            rec("l1", "m", 5780, 1, 1),
            rec("l1", "m", 5780, 2, 3),
            rec("l2", "m", 5780, 3, 1),
        ];
        let report = collision_risk_histogram(&records);
        assert_eq!(report.bins.len(), 1);
        assert_eq!(report.bins[0].group_size, 1);
        assert_eq!(report.bins[0].group_count, 3);
        assert_eq!(report.at_risk_location_fraction, 0.0);
        // Same index on different carriers is not a shared resource.
        let records = vec![rec("l", "m", 5780, 1, 1), rec("l", "m", 5790, 2, 1)];
        let report = collision_risk_histogram(&records);
        assert_eq!(report.at_risk_location_fraction, 0.0);
    }

    #[test]
    fn histogram_mass_and_shares_are_consistent() {
        let records = synthetic_records(7);
        let report = collision_risk_histogram(&records);
        let mass: usize = report
            .bins
            .iter()
            .map(|b| b.group_size * b.group_count)
            .sum();
        assert_eq!(mass, records.len());
        let share_sum: f64 = report.bins.iter().map(|b| b.share_of_groups).sum();
        assert!((share_sum - 1.0).abs() < 1e-9);
        for bin in &report.bins {
            assert!(bin.share_of_locations > 0.0 && bin.share_of_locations <= 1.0);
        }
    }

    #[test]
    fn empty_records_produce_empty_histogram() {
        let report = collision_risk_histogram(&[]);
        assert!(report.bins.is_empty());
        assert_eq!(report.at_risk_location_fraction, 0.0);
    }

    #[test]
    fn format_usage_counts_single_class() {
        let records = vec![rec("l", "m", 1, 1, 1), rec("l", "m", 1, 2, 1)];
        let report = format_usage_by_area(&records);
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].area_class, AreaClass::Urban);
        assert_eq!(report.rows[0].format, 0);
        assert_eq!(report.rows[0].count, 2);
        assert_eq!(report.rows[0].share, 1.0);
        assert!(report.excluded_reserved.is_empty());
    }

    #[test]
    fn format_usage_splits_mixed_rural_evenly() {
        let mut a = rec("l", "m", 1, 1, 1);
        a.area_class = AreaClass::Rural;
        let mut b = rec("l", "m", 1, 2, 18);
        b.area_class = AreaClass::Rural;
        let report = format_usage_by_area(&[a, b]);
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.area_class, AreaClass::Rural);
            assert_eq!(row.share, 0.5);
        }
        assert_eq!(report.rows[0].format, 0);
        assert_eq!(report.rows[1].format, 1);
    }

    #[test]
    fn reserved_indices_are_excluded_and_reported() {
        let records = vec![rec("l", "m", 1, 1, 1), rec("l", "m", 1, 2, 30)];
        let report = format_usage_by_area(&records);
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].share, 1.0);
        assert_eq!(report.excluded_reserved.len(), 1);
        assert_eq!(report.excluded_reserved[0].prach_config_index, 30);
        assert_eq!(report.excluded_reserved[0].cell_id, 2);
    }

    #[test]
    fn format_shares_sum_to_one_per_nonempty_class() {
        let records = synthetic_records(5);
        let report = format_usage_by_area(&records);
        let mut class_sums: BTreeMap<AreaClass, f64> = BTreeMap::new();
        for row in &report.rows {
            *class_sums.entry(row.area_class).or_default() += row.share;
        }
        for (&class, &sum) in &class_sums {
            assert!((sum - 1.0).abs() < 1e-9, "{class:?} sums to {sum}");
        }
        // Ordering: urban rows first, rural last.
        let classes: Vec<AreaClass> = report.rows.iter().map(|r| r.area_class).collect();
        let mut sorted = classes.clone();
        sorted.sort();
        assert_eq!(classes, sorted);
    }

    #[test]
    fn unique_counts_match_simple_examples() {
        let mut a = base_record();
        a.cell_id = 1;
        let mut b = base_record();
        b.cell_id = 2;
        let mut c = base_record();
        c.cell_id = 3;
        c.power_ramping_step_db = 4.0;
        let rows = unique_ie_value_counts(&[a, b, c], None);
        assert_eq!(rows.len(), IE_COLUMNS.len());
        let by_name: BTreeMap<&str, usize> =
            rows.iter().map(|r| (r.ie_name, r.unique_values)).collect();
        assert_eq!(by_name["power_ramping_step_db"], 2);
        assert_eq!(by_name["num_ra_preambles"], 1);
        assert_eq!(by_name["prach_config_index"], 1);
        // IE order matches the documented list.
        let names: Vec<&str> = rows.iter().map(|r| r.ie_name).collect();
        assert_eq!(names, IE_COLUMNS.to_vec());
    }

    #[test]
    fn grouped_unique_counts_match_brute_force() {
        let records = synthetic_records(11);
        for group_by in [GroupBy::Country, GroupBy::Mno] {
            let rows = unique_ie_value_counts(&records, Some(group_by));
            for row in &rows {
                let group = row.group.as_deref().unwrap();
                let mut seen: Vec<String> = Vec::new();
                for r in &records {
                    let key = match group_by {
                        GroupBy::Country => r.country.as_str(),
                        GroupBy::Mno => r.mno.as_str(),
                    };
                    if key == group {
                        let v = ie_value_string(r, row.ie_name);
                        if !seen.contains(&v) {
                            seen.push(v);
                        }
                    }
                }
                assert_eq!(row.unique_values, seen.len(), "{group} {}", row.ie_name);
            }
        }
    }

    #[test]
    fn response_window_is_nearly_constant_per_country() {
        let records = synthetic_records(1);
        let rows = unique_ie_value_counts(&records, Some(GroupBy::Country));
        let window_rows: Vec<&UniqueIeRow> = rows
            .iter()
            .filter(|r| r.ie_name == "ra_response_window_sf")
            .collect();
        assert_eq!(window_rows.len(), 3);
        for row in window_rows {
            assert!(
                (1..=2).contains(&row.unique_values),
                "{:?} has {}",
                row.group,
                row.unique_values
            );
        }
    }

    #[test]
    fn synthetic_fixture_is_deterministic_and_at_risk() {
        let a = synthetic_records(1);
        let b = synthetic_records(1);
        assert_eq!(a, b);
        assert_ne!(a, synthetic_records(2));

        let report = collision_risk_histogram(&a);
        assert_eq!(report.n_locations, 36);
        assert!(
            report.at_risk_location_fraction >= 0.6,
            "at-risk fraction {}",
            report.at_risk_location_fraction
        );

        // Format 0 dominates overall.
        let usage = format_usage_by_area(&a);
        let mut format_counts: BTreeMap<u8, usize> = BTreeMap::new();
        for row in &usage.rows {
            *format_counts.entry(row.format).or_default() += row.count;
        }
        assert!(format_counts[&0] > format_counts.get(&1).copied().unwrap_or(0));

        // Unique keys: the round-trip dedup drops nothing.
        let mut keys: BTreeSet<(String, String, u32, u64)> = BTreeSet::new();
        for r in &a {
            assert!(keys.insert((
                r.location_id.clone(),
                r.mno.clone(),
                r.earfcn,
                r.cell_id
            )));
        }
    }

    #[test]
    fn insight_csvs_have_documented_headers() {
        let dir = tempfile::tempdir().unwrap();
        let records = synthetic_records(1);
        let hist_path = dir.path().join("insight1_histogram.csv");
        write_histogram_csv(&hist_path, &collision_risk_histogram(&records)).unwrap();
        let text = std::fs::read_to_string(&hist_path).unwrap();
        assert!(text.starts_with(
            "group_size,group_count,share_of_groups,share_of_locations,at_risk_location_fraction\n"
        ));

        let fmt_path = dir.path().join("insight2_formats.csv");
        write_formats_csv(&fmt_path, &format_usage_by_area(&records)).unwrap();
        let text = std::fs::read_to_string(&fmt_path).unwrap();
        assert!(text.starts_with("area_class,format,count,share\n"));

        let ies_path = dir.path().join("insight3_unique_ies.csv");
        write_unique_ies_csv(&ies_path, &unique_ie_value_counts(&records, None), None).unwrap();
        let text = std::fs::read_to_string(&ies_path).unwrap();
        assert!(text.starts_with("ie,unique_values\n"));
        assert_eq!(text.lines().count(), 1 + IE_COLUMNS.len());

        let grouped = dir.path().join("insight3_by_country.csv");
        write_unique_ies_csv(
            &grouped,
            &unique_ie_value_counts(&records, Some(GroupBy::Country)),
            Some(GroupBy::Country),
        )
        .unwrap();
        let text = std::fs::read_to_string(&grouped).unwrap();
        assert!(text.starts_with("country,ie,unique_values\n"));
        assert_eq!(text.lines().count(), 1 + 3 * IE_COLUMNS.len());
    }

    #[test]
    fn analyses_are_pure() {
        let records = synthetic_records(9);
        assert_eq!(
            collision_risk_histogram(&records),
            collision_risk_histogram(&records)
        );
        assert_eq!(format_usage_by_area(&records), format_usage_by_area(&records));
        assert_eq!(
            unique_ie_value_counts(&records, Some(GroupBy::Mno)),
            unique_ie_value_counts(&records, Some(GroupBy::Mno))
        );
    }
}
