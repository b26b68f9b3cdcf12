//! Library side of the `depletion` binary.

pub mod config;
pub mod run;
pub mod snapshot;
