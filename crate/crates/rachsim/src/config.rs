//! Flat `key = value` configuration files and CLI override layering.
//!
//! A config file sets sweep and scenario fields by name, one per line, with
//! `#` starting a comment. Later lines override earlier ones, command-line
//! overrides beat the file, and anything left unset keeps its default.
//!
//! ```text
//! # two-cell sweep at a finer load grid
//! cells = 2
//! ues = 10, 20, 40, 80
//! schemes = same, different
//! repetitions = 5
//! ra.num_ra_preambles = 52
//! timeline.rar_delay_sf = 3
//! ```
//!
//! Scheme names are resolved only after the whole file is read, so
//! `same_index` may appear anywhere relative to the `schemes` line.

use crate::engine::Scheme;
use crate::prach::{PrachConfigIndex, PrachError};
use crate::sweep::SweepSpec;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("unknown scheme '{name}' (expected same, different, coloring, or file:PATH)")]
    UnknownScheme { name: String },
    #[error(transparent)]
    Index(#[from] PrachError),
}

/// Sweep fields settable from command-line flags; `None` leaves the file or
/// default value in place.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub schemes: Option<Vec<String>>,
    pub cells: Option<Vec<usize>>,
    pub ues: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub repetitions: Option<u32>,
}

struct WorkingConfig {
    spec: SweepSpec,
    scheme_names: Vec<String>,
    same_index_raw: u32,
}

impl Default for WorkingConfig {
    fn default() -> Self {
        WorkingConfig {
            spec: SweepSpec::default(),
            scheme_names: vec!["same".into(), "different".into()],
            same_index_raw: 1,
        }
    }
}

fn line_err(line: usize, reason: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        reason: reason.into(),
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| line_err(line, format!("bad value for {key}: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|item| parse_scalar(key, item.trim(), line))
        .collect()
}

fn apply_line(cfg: &mut WorkingConfig, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
    let spec = &mut cfg.spec;
    match key {
        "cells" => spec.cell_counts = parse_list(key, value, line)?,
        "ues" => spec.ue_counts = parse_list(key, value, line)?,
        "schemes" => {
            cfg.scheme_names = value.split(',').map(|s| s.trim().to_string()).collect()
        }
        "seed" => spec.seed = parse_scalar(key, value, line)?,
        "repetitions" => spec.repetitions = parse_scalar(key, value, line)?,
        "sim_time_ms" => spec.base.sim_time_ms = parse_scalar(key, value, line)?,
        "isd_m" => spec.base.isd_m = parse_scalar(key, value, line)?,
        "carrier_hz" => spec.base.carrier_hz = parse_scalar(key, value, line)?,
        "same_index" => cfg.same_index_raw = parse_scalar(key, value, line)?,
        "palette" => {
            let raw: Vec<u32> = parse_list(key, value, line)?;
            spec.base.palette = raw
                .into_iter()
                .map(PrachConfigIndex::new)
                .collect::<Result<_, _>>()
                .map_err(|e| line_err(line, format!("bad value for palette: {e}")))?;
        }
        "path_loss_exponent" => spec.base.path_loss_exponent = parse_scalar(key, value, line)?,
        "detection_threshold_dbm" => {
            spec.base.detection_threshold_dbm = parse_scalar(key, value, line)?
        }
        "capture_margin_db" => {
            spec.base.capture_margin_db = match value {
                "none" | "off" => None,
                other => Some(parse_scalar(key, other, line)?),
            }
        }
        "ue_height_m" => spec.base.ue_height_m = parse_scalar(key, value, line)?,
        "cell_antenna_height_m" => {
            spec.base.cell_antenna_height_m = parse_scalar(key, value, line)?
        }
        "ra.num_ra_preambles" => spec.base.ra.num_ra_preambles = parse_scalar(key, value, line)?,
        "ra.power_ramping_step_db" => {
            spec.base.ra.power_ramping_step_db = parse_scalar(key, value, line)?
        }
        "ra.preamble_initial_target_power_dbm" => {
            spec.base.ra.preamble_initial_target_power_dbm = parse_scalar(key, value, line)?
        }
        "ra.preamble_trans_max" => {
            spec.base.ra.preamble_trans_max = parse_scalar(key, value, line)?
        }
        "ra.ra_response_window_sf" => {
            spec.base.ra.ra_response_window_sf = parse_scalar(key, value, line)?
        }
        "ra.contention_resolution_timer_sf" => {
            spec.base.ra.contention_resolution_timer_sf = parse_scalar(key, value, line)?
        }
        "ra.backoff_max_sf" => spec.base.ra.backoff_max_sf = parse_scalar(key, value, line)?,
        "timeline.rar_delay_sf" => {
            spec.base.timeline.rar_delay_sf = parse_scalar(key, value, line)?
        }
        "timeline.msg3_delay_sf" => {
            spec.base.timeline.msg3_delay_sf = parse_scalar(key, value, line)?
        }
        "timeline.msg4_delay_sf" => {
            spec.base.timeline.msg4_delay_sf = parse_scalar(key, value, line)?
        }
        other => return Err(line_err(line, format!("unknown key '{other}'"))),
    }
    Ok(())
}

fn parse_config_text(text: &str, cfg: &mut WorkingConfig) -> Result<(), ConfigError> {
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let uncommented = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = uncommented.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| line_err(line_no, "expected 'key = value'"))?;
        apply_line(cfg, key.trim(), value.trim(), line_no)?;
    }
    Ok(())
}

/// Resolves scheme names into schemes. `same_index` is the index announced
/// by every cell under `same`; `file:PATH` loads an explicit assignment.
pub fn parse_scheme_names(
    names: &[String],
    same_index: PrachConfigIndex,
) -> Result<Vec<Scheme>, ConfigError> {
    names
        .iter()
        .map(|name| match name.as_str() {
            "same" => Ok(Scheme::Same(same_index)),
            "different" => Ok(Scheme::DifferentRows),
            "coloring" => Ok(Scheme::GreedyColoring),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Scheme::File(PathBuf::from(path))),
                _ => Err(ConfigError::UnknownScheme {
                    name: other.to_string(),
                }),
            },
        })
        .collect()
}

/// Builds the sweep from defaults, then the optional config file, then the
/// command-line overrides, in that precedence order.
pub fn load_sweep_spec(
    config_path: Option<&Path>,
    overrides: &CliOverrides,
) -> Result<SweepSpec, ConfigError> {
    let mut cfg = WorkingConfig::default();
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)?;
        parse_config_text(&text, &mut cfg)?;
    }
    if let Some(cells) = &overrides.cells {
        cfg.spec.cell_counts = cells.clone();
    }
    if let Some(ues) = &overrides.ues {
        cfg.spec.ue_counts = ues.clone();
    }
    if let Some(schemes) = &overrides.schemes {
        cfg.scheme_names = schemes.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.spec.seed = seed;
    }
    if let Some(reps) = overrides.repetitions {
        cfg.spec.repetitions = reps;
    }
    let same_index = PrachConfigIndex::new(cfg.same_index_raw)?;
    cfg.spec.schemes = parse_scheme_names(&cfg.scheme_names, same_index)?;
    Ok(cfg.spec)
}
