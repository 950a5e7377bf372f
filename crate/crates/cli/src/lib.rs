//! Scenario runner for `vhetnet-core`: sweeps one parameter over analytical
//! and Monte Carlo paths and writes CSV.

pub mod presets;
pub mod runner;
pub mod scenario;

pub use presets::{list_presets, preset, PRESETS};
pub use runner::{run, write_csv, RunOptions, Row, COLUMNS, SCHEMA_VERSION};
pub use scenario::{PathKind, Scenario};
