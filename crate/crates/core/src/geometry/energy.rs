//! Configuration energy (volume of the union of depletion balls) and its
//! gradient.

use std::f64::consts::PI;

use super::overlap::{rho_thresholds, shell_factor, v_unit_ball, OverlapPotential};
use super::three_body::three_body_2d;
use super::union::monte_carlo_union_volume;
use crate::error::GeometryError;
use crate::model::{dist2, max_contact_number, ModelParams};

/// `n v_d r⊙^d − Σ_{i<j} 𝓥(|x_i − x_j| / 2r⊙)`.
///
/// Exact for ρ ≤ ρ₂; for larger ρ it ignores multi-body overlaps.
pub fn energy_pairwise(spheres: &[f64], params: &ModelParams) -> f64 {
    let d = params.d;
    let n = spheres.len() / d;
    let pot = OverlapPotential::from_params(params);
    let mut total = n as f64 * single_ball_volume(params);
    for i in 0..n {
        let xi = &spheres[i * d..(i + 1) * d];
        for j in (i + 1)..n {
            let r = dist2(xi, &spheres[j * d..(j + 1) * d]).sqrt();
            total -= pot.at_distance(r);
        }
    }
    total
}

/// Pairwise energy terms involving sphere `i` placed at `xi`; the rest of the
/// configuration is read from `spheres`.
pub fn pair_energy_of(spheres: &[f64], i: usize, xi: &[f64], params: &ModelParams) -> f64 {
    let d = params.d;
    let n = spheres.len() / d;
    let pot = OverlapPotential::from_params(params);
    let mut e = 0.0;
    for j in (0..n).filter(|&j| j != i) {
        let r = dist2(xi, &spheres[j * d..(j + 1) * d]).sqrt();
        e -= pot.at_distance(r);
    }
    e
}

/// `v_d r⊙^d`.
pub fn single_ball_volume(params: &ModelParams) -> f64 {
    v_unit_ball(params.d) * params.r_depletion().powi(params.d as i32)
}

/// Whether the pairwise energy equals the union volume (ρ ≤ ρ₂).
pub fn pairwise_is_exact(params: &ModelParams) -> bool {
    params.rho() <= rho_thresholds(params.d).0
}

/// Gradient of [`energy_pairwise`] with respect to every sphere center,
/// returned flat (`n × d`).
///
/// Component `i` is `v_{d−1} r⊙^{d−1} Σ_j (1 − |x_i − x_j|²/4r⊙²)_+^{(d−1)/2}
/// (x_i − x_j)/|x_i − x_j|`; it points away from overlapping neighbours since
/// separating them shrinks the overlap and so raises the energy.
pub fn energy_gradient(spheres: &[f64], params: &ModelParams) -> Result<Vec<f64>, GeometryError> {
    let d = params.d;
    let n = spheres.len() / d;
    let mut grad = vec![0.0; spheres.len()];
    energy_gradient_into(spheres, params, &mut grad)?;
    debug_assert_eq!(grad.len(), n * d);
    Ok(grad)
}

pub(crate) fn energy_gradient_into(
    spheres: &[f64],
    params: &ModelParams,
    grad: &mut [f64],
) -> Result<(), GeometryError> {
    let d = params.d;
    let n = spheres.len() / d;
    let r_dep = params.r_depletion();
    let four_r2 = 4.0 * r_dep * r_dep;
    let coef = v_unit_ball(d - 1) * r_dep.powi(d as i32 - 1);
    grad.iter_mut().for_each(|g| *g = 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let xi = &spheres[i * d..(i + 1) * d];
            let xj = &spheres[j * d..(j + 1) * d];
            let r2 = dist2(xi, xj);
            if r2 >= four_r2 {
                continue;
            }
            if r2 == 0.0 {
                return Err(GeometryError::CoincidentCenters(i, j));
            }
            let w = coef * shell_factor(r2 / four_r2, d) / r2.sqrt();
            for k in 0..d {
                let f = w * (spheres[i * d + k] - spheres[j * d + k]);
                grad[i * d + k] += f;
                grad[j * d + k] -= f;
            }
        }
    }
    Ok(())
}

/// Which inclusion–exclusion terms an [`EnergyModel`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyOrder {
    Pairwise,
    /// Pair plus planar three-body terms (d = 2 only).
    PairwisePlusTriple,
    /// Hit-or-miss estimate of the union volume.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Energy value together with whether the chosen truncation is exact here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    pub exact: bool,
    /// Standard error for Monte Carlo estimates, zero otherwise.
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub params: ModelParams,
    pub body_order: BodyOrder,
}

impl EnergyModel {
    pub fn new(params: ModelParams, body_order: BodyOrder) -> Result<Self, GeometryError> {
        if body_order == BodyOrder::PairwisePlusTriple && params.d != 2 {
            return Err(GeometryError::ThreeBodyUnsupported(params.d));
        }
        Ok(Self { params, body_order })
    }

    pub fn evaluate(&self, spheres: &[f64]) -> Result<EnergyEstimate, GeometryError> {
        let p = &self.params;
        let (rho2, rho3) = rho_thresholds(p.d);
        match self.body_order {
            BodyOrder::Pairwise => Ok(EnergyEstimate {
                value: energy_pairwise(spheres, p),
                exact: p.rho() <= rho2,
                std_error: 0.0,
            }),
            BodyOrder::PairwisePlusTriple => {
                let d = p.d;
                let n = spheres.len() / d;
                let r_dep = p.r_depletion();
                let mut value = energy_pairwise(spheres, p);
                if p.rho() > rho2 {
                    for i in 0..n {
                        for j in (i + 1)..n {
                            for k in (j + 1)..n {
                                value += three_body_2d(
                                    &spheres[i * d..(i + 1) * d],
                                    &spheres[j * d..(j + 1) * d],
                                    &spheres[k * d..(k + 1) * d],
                                    r_dep,
                                )?;
                            }
                        }
                    }
                }
                Ok(EnergyEstimate {
                    value,
                    exact: p.rho() <= rho3,
                    std_error: 0.0,
                })
            }
            BodyOrder::MonteCarlo { samples, seed } => {
                let (value, std_error) = monte_carlo_union_volume(spheres, p, samples, seed);
                Ok(EnergyEstimate {
                    value,
                    exact: false,
                    std_error,
                })
            }
        }
    }
}

/// Minimal energy `E_* = n v_d r⊙^d − c(n, d) 𝓥*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalEnergy {
    pub value: f64,
    pub contact_number: usize,
    /// `false` when `c(n, d)` is only a best-known lower bound, in which case
    /// `value` is an upper bound on the true minimum.
    pub exact: bool,
}

pub fn minimal_energy(n: usize, params: &ModelParams) -> Result<MinimalEnergy, GeometryError> {
    let known = max_contact_number(n, params.d).ok_or(GeometryError::MissingContactConstant {
        n,
        d: params.d,
    })?;
    let vstar = OverlapPotential::from_params(params).max_value();
    Ok(MinimalEnergy {
        value: n as f64 * single_ball_volume(params) - known.value as f64 * vstar,
        contact_number: known.value,
        exact: known.exact,
    })
}

/// Small-ρ expansion of the minimal energy with the remainder dropped.
///
/// In d = 2 this keeps every term through `ρ²`, so the dropped remainder is
/// `O(ρ^{5/2})`:
/// `n π r̊² (1 + 2ρ + ρ² − (8√2 / 3π)(c/n) ρ^{3/2})`.
/// In d = 3: `n (4/3) π r̊³ (1 + 3ρ + 3(1 − c/2n) ρ²)`, remainder `O(ρ³)`.
pub fn asymptotic_minimal_energy(n: usize, params: &ModelParams) -> Result<f64, GeometryError> {
    let d = params.d;
    let known = max_contact_number(n, d).ok_or(GeometryError::MissingContactConstant { n, d })?;
    let c = known.value as f64;
    let nf = n as f64;
    let rho = params.rho();
    let r = params.r_sphere;
    match d {
        2 => Ok(nf
            * PI
            * r
            * r
            * (1.0 + 2.0 * rho + rho * rho
                - 8.0 * 2f64.sqrt() / (3.0 * PI) * (c / nf) * rho.powf(1.5))),
        3 => Ok(nf * 4.0 / 3.0 * PI * r.powi(3) * (1.0 + 3.0 * rho + 3.0 * (1.0 - c / (2.0 * nf)) * rho * rho)),
        _ => Err(GeometryError::MissingContactConstant { n, d }),
    }
}
