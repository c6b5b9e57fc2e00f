//! Image IO, noise, metrics, traces and the solver driver behind the `rofdd`
//! command-line tool.

pub mod cli;
pub mod driver;
pub mod exec;
pub mod metrics;
pub mod noise;
pub mod pgm;
pub mod trace;

pub use rofdd_core as core;
