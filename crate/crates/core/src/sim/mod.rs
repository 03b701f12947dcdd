//! Sweep driver: configuration, Monte-Carlo runs and result files.

pub mod config;
pub mod output;
pub mod reference;
pub mod selftest;
pub mod sweep;

pub use config::{load_config, parse_config, MetricsConfig, OutputFormat, RunConfig, ScenarioConfig};
pub use output::{budget_reports, emit_outputs, format_budget_table, format_results_table, sig6};
pub use reference::{ReferenceCell, REFERENCE_CELLS};
pub use selftest::{run_selftest, Check};
pub use sweep::{run_sweep, run_sweep_with, CellArtifacts, RunMetadata, SweepResults};
