//! Experiment front end: TOML configuration, the four run modes, result
//! tables and their CSV / JSON-lines serialization.

mod config;
mod run;
mod table;

pub use config::{
    parse_config, parse_sweep_param, AttackSection, ExperimentConfig, FakeKind, PerParty, PhaseKind,
    RunMode, SweepSection, TamperSection, MAX_PARTIES, SWEEP_PARAMS,
};
pub use run::{
    linear_extrapolation, run, run_attack, run_characterize, run_keygen, run_sweep, sweep_point,
};
pub use table::{emit, format_number, OutputFormat, ResultRow, ResultTable, CSV_COLUMNS};
