pub mod integrator;
pub mod potential;
pub mod projection;

pub use integrator::{
    depletion_drift, simulate, step_depletion, step_depletion_with_noise, step_two_type, step_two_type_with_noise,
    DriftConvention, DynamicsSettings, IntegratorState, LocalTimes, ParticleDrift, Potentials, RunMode,
    TrajectoryRecord,
};
pub use potential::{hinge, hinge_derivative, psi_value_and_grad, PotentialKind, PotentialSpec};
pub use projection::{
    resolve_constraints, violated_pairs, Correction, Mobility, ProjectionLedger, DEFAULT_MAX_PROJ_ITERS,
};
