//! Parameter sweeps over propagation length, CSV output and figure presets.

mod config;
mod presets;
mod sweep;

pub use config::{Axis, Family, MethodChoice, Metric, SweepConfig};
pub use presets::{preset, preset_names, PRESETS};
pub use sweep::{
    curves, fmt_float, header, output_columns, run_sweep, CurveParams, SweepRow, SweepTable,
};
