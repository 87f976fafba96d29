//! Scenario configuration, pulse synthesis and the scenario runner.

pub mod config;
pub mod pulse;
pub mod run;

pub use config::{
    parse_config, parse_config_with, parse_override, ConfigErrors, ConfigIssue, IssueKind, Override, ScenarioConfig,
    ScenarioKind,
};
pub use pulse::{
    parse_sample_file, resample, synthesize_pulse, synthesize_pulse_in, write_sample_file, PulseShape, PulseSpec, Regime,
};
pub use run::{run_scenario, Check, RunSummary};
