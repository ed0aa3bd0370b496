//! Config-driven runner for the `deltakick` simulations.

pub mod config;
pub mod run;

pub use config::{ConfigError, Kind, RunConfig};
pub use run::{execute, Outputs};
