//! File formats, run configuration and the `svcdep` command line around
//! [`svcdep_core`].
//!
//! Commands live in [`run`] and return their stdout lines, so the binary is a
//! thin argument parser and tests can drive everything in-process.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use checkpoint::Checkpoint;
pub use config::RunConfig;
pub use error::RunError;

/// Single-knob sweep spec from a CLI knob name and grid.
pub fn eval_knob_grid(knob: &str, grid: Vec<f64>) -> Result<svcdep_core::SweepSpec, RunError> {
    Ok(svcdep_core::SweepSpec::single(svcdep_core::SweepKnob::parse(knob)?, grid))
}
