//! Estimators over snapshot and sample streams.

pub mod histogram;
pub mod path;
pub mod stats;

pub use histogram::{default_pair_edges, pair_distance_histogram, Histogram};
pub use path::{energy_trace, modulus_of_continuity, running_minimum};
pub use stats::{effective_sample_size, integrated_autocorrelation_time, ks_critical_value, ks_statistic};
