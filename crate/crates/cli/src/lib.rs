//! Configuration, parameter sweeps, figure presets and result emission for
//! the `oscbath` command-line tool.

pub mod config;
pub mod emit;
pub mod presets;
pub mod sweep;

pub use config::{emit_config, parse_config, parse_simulation, Axis, AxisValues, Numerics, Output, Scale, SweepSpec};
pub use emit::{read_csv, table_csv, Format};
pub use presets::{figure_preset, preset_config, PRESETS};
pub use sweep::{run_family, run_simulation, run_sweep, ResultTable, Row, SweepError};
