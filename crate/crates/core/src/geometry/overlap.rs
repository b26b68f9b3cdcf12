//! The depletion overlap potential: volume of the lens shared by two
//! depletion balls as a function of the rescaled center distance
//! `u = |x_i - x_j| / (2 r⊙)`.

use std::f64::consts::PI;

use crate::quadrature::integrate;

/// Volume of the unit ball in dimension `d` (`v_0 = 1`, `v_1 = 2`).
pub fn v_unit_ball(d: usize) -> f64 {
    // v_d = 2π/d · v_{d-2}
    let (mut v, mut k) = if d % 2 == 0 { (1.0, 0) } else { (2.0, 1) };
    while k < d {
        k += 2;
        v *= 2.0 * PI / k as f64;
    }
    v
}

const QUAD_TOL: f64 = 1e-12;

/// Overlap volume from the angular integral
/// `2 v_{d-1} r⊙^d ∫_0^{arccos u} sin^d θ dθ`, evaluated by adaptive quadrature.
pub fn overlap_quadrature(u: f64, d: usize, r_dep: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    let upper = u.clamp(-1.0, 1.0).acos();
    let rd = r_dep.powi(d as i32);
    let prefactor = 2.0 * v_unit_ball(d - 1) * rd;
    // Tolerance is absolute on the returned volume.
    let tol = QUAD_TOL / prefactor.max(f64::MIN_POSITIVE);
    prefactor * integrate(|t: f64| t.sin().powi(d as i32), 0.0, upper, tol)
}

/// Lens area of two discs of radius `r_dep`, `2 r⊙² (arccos u − u √(1 − u²))`.
pub fn overlap_closed_2d(u: f64, r_dep: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    let u = u.max(0.0);
    2.0 * r_dep * r_dep * (u.acos() - u * (1.0 - u * u).sqrt())
}

/// Lens volume of two balls of radius `r_dep`, `(4π/3) r⊙³ (1 − u)² (1 + u/2)`.
pub fn overlap_closed_3d(u: f64, r_dep: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    let u = u.max(0.0);
    4.0 * PI / 3.0 * r_dep.powi(3) * (1.0 - u).powi(2) * (1.0 + 0.5 * u)
}

/// `(1 - u²)_+^{(d-1)/2}`, zero whenever the base is not positive.
#[inline]
pub(crate) fn shell_factor(u2: f64, d: usize) -> f64 {
    let base = 1.0 - u2;
    if base <= 0.0 {
        return 0.0;
    }
    match d {
        1 => 1.0,
        2 => base.sqrt(),
        3 => base,
        _ => base.powf(0.5 * (d as f64 - 1.0)),
    }
}

/// `d𝓥/du = −2 v_{d−1} r⊙^d (1 − u²)^{(d−1)/2}` on `[0, 1)`, zero beyond.
pub fn overlap_derivative(u: f64, d: usize, r_dep: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    -2.0 * v_unit_ball(d - 1) * r_dep.powi(d as i32) * shell_factor(u * u, d)
}

/// Size-ratio thresholds `(ρ₂, ρ₃)`: below ρ₂ only pair overlaps occur, below
/// ρ₃ no four depletion balls share a point.
pub fn rho_thresholds(d: usize) -> (f64, f64) {
    let rho2 = 2.0 * 3f64.sqrt() / 3.0 - 1.0;
    let rho3 = if d <= 2 { 2f64.sqrt() - 1.0 } else { 1.5f64.sqrt() - 1.0 };
    (rho2, rho3)
}

/// Radial overlap potential for a given dimension, depletion radius and size
/// ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapPotential {
    pub d: usize,
    pub r_depletion: f64,
    pub rho: f64,
}

impl OverlapPotential {
    pub fn new(d: usize, r_depletion: f64, rho: f64) -> Self {
        Self { d, r_depletion, rho }
    }

    pub fn from_params(params: &crate::ModelParams) -> Self {
        Self::new(params.d, params.r_depletion(), params.rho())
    }

    /// Overlap volume at rescaled distance `u`.
    pub fn value(&self, u: f64) -> f64 {
        match self.d {
            2 => overlap_closed_2d(u, self.r_depletion),
            3 => overlap_closed_3d(u, self.r_depletion),
            d => overlap_quadrature(u, d, self.r_depletion),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        overlap_derivative(u, self.d, self.r_depletion)
    }

    /// Overlap volume as a function of the center distance.
    pub fn at_distance(&self, r: f64) -> f64 {
        self.value(r / (2.0 * self.r_depletion))
    }

    /// Hard-contact value of the rescaled distance, `1 / (1 + ρ)`.
    pub fn u_contact(&self) -> f64 {
        1.0 / (1.0 + self.rho)
    }

    /// Maximal overlap 𝓥*, attained at hard contact. Evaluated on each call.
    pub fn max_value(&self) -> f64 {
        self.value(self.u_contact())
    }
}
