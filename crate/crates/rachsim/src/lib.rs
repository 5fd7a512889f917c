//! Simulation and measurement analysis of LTE contention-based random
//! access.
//!
//! The crate has two halves. The simulation half models a hexagonal grid of
//! cells whose PRACH opportunities are scheduled by their PRACH-ConfigIndex,
//! and runs populations of UEs through the contention-based random access
//! procedure to count preamble collisions and connection delays under
//! different per-cell index assignment schemes. The analysis half ingests
//! tabular SIB2 capture records and reports how operators configure random
//! access in practice: how often co-located cells share an index, which
//! preamble formats appear where, and how diverse each IE's values are.
//!
//! Modules, roughly bottom-up:
//!
//! - [`prach`]: radio time, the PRACH configuration table, opportunity
//!   scheduling, and random access parameter sets;
//! - [`topology`]: hexagonal grids, UE placement, and neighbor graphs;
//! - [`assignment`]: per-cell index assignment schemes;
//! - [`radio`]: path loss, power ramping, and preamble reception;
//! - [`engine`]: the per-subframe procedure simulation;
//! - [`report`]: per-run records and cross-repetition aggregation;
//! - [`sweep`]: sweep orchestration and CSV output;
//! - [`config`]: configuration files and override layering;
//! - [`analyzer`]: SIB2 capture ingest and the three insight analyses.

pub mod analyzer;
pub mod assignment;
pub mod config;
pub mod engine;
pub mod prach;
pub mod radio;
pub mod report;
pub mod sweep;
pub mod topology;

pub use engine::{run_scenario, RunResult, ScenarioConfig, Scheme};
pub use prach::{PrachConfigIndex, RaParameters, RadioTime};
pub use sweep::{run_sweep, SweepOutput, SweepSpec};
