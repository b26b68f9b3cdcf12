//! Two-size hard-sphere (Asakura–Oosawa) depletion model.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds model parameters, configurations, admissibility and
//!   contact-number bookkeeping.
//! * [`geometry`] evaluates the depletion overlap potential, the pairwise
//!   energy and its gradient, the planar three-body term and a Monte Carlo
//!   union-volume estimator.
//! * [`dynamics`] integrates the reflected two-type SDE and the depletion
//!   gradient SDE with projection-based reflection and local-time accounting.
//! * [`sampling`] provides equilibrium samplers and the activity-annealing
//!   packing optimizer.
//! * [`analysis`] folds trajectory and sample streams into histograms,
//!   KS statistics, energy traces and path diagnostics.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod sampling;

pub use error::{AnalysisError, DynamicsError, GeometryError, ModelError, SamplingError};
pub use model::{
    contact_number, is_admissible, known_contact_values_3d, max_contact_number_2d, Configuration,
    ContactGraph, KnownContacts, ModelParams, EPS_CONTACT_ANALYTIC, EPS_CONTACT_ANNEAL,
    TOL_OVERLAP,
};
