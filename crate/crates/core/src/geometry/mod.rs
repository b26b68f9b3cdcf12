pub mod energy;
pub mod overlap;
pub mod three_body;
pub mod union;

pub use energy::{
    asymptotic_minimal_energy, energy_gradient, energy_pairwise, minimal_energy, pair_energy_of,
    pairwise_is_exact, single_ball_volume, BodyOrder, EnergyEstimate, EnergyModel, MinimalEnergy,
};
pub use overlap::{
    overlap_closed_2d, overlap_closed_3d, overlap_derivative, overlap_quadrature, rho_thresholds,
    v_unit_ball, OverlapPotential,
};
pub use three_body::{intersection_area, three_body_2d, three_body_formula};
pub use union::monte_carlo_union_volume;
