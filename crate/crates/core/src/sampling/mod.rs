pub mod anneal;
pub mod bath;
pub mod metropolis;

pub use anneal::{
    anneal_packing, anneal_packing_with_psi, annealing_psi, concentration_estimate, AnnealResult, AnnealSchedule,
    DEFAULT_SWEEPS_PER_LEVEL, LONG_JUMP_PROB,
};
pub use bath::{bath_window, sample_bath_given_spheres, sample_bath_with, sample_two_type, two_type_start};
pub use metropolis::{
    grid_start, metropolis_accept_prob, sample_hard_spheres, sample_hard_spheres_from, HardSphereChain, MCMCParams,
    SampleRun, TARGET_ACCEPTANCE,
};
