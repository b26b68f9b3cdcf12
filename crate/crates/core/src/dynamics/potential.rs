//! Radial confinement potentials built on the convex hinge profile
//! `φ(t) = 0` for `t ≤ 0`, `t²/4` on `[0, 2]`, `t − 1` for `t ≥ 2`.

use crate::error::DynamicsError;
use crate::geometry::v_unit_ball;
use crate::quadrature::integrate;

/// Hinge profile φ.
pub fn hinge(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= 2.0 {
        0.25 * t * t
    } else {
        t - 1.0
    }
}

/// φ′, continuous and bounded by 1.
pub fn hinge_derivative(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= 2.0 {
        0.5 * t
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// ψ̊ = a + φ(κ(|x| − ρ₀)), normalized so that `e^{−ψ̊}` is a probability
    /// density.
    SphereConfinement,
    /// ψ̇^R = φ(R^{d+1}(|x| − R)); vanishes on the ball of radius R.
    ParticleConfinement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub d: usize,
    /// ρ₀ for ψ̊, R for ψ̇^R.
    pub hinge_radius: f64,
    /// κ for ψ̊, `R^{d+1}` for ψ̇^R.
    pub slope: f64,
    /// Additive constant `a` (zero for ψ̇^R).
    pub normalization: f64,
}

fn check_positive(field: &'static str, v: f64, allow_zero: bool) -> Result<(), DynamicsError> {
    let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(DynamicsError::InvalidSetting {
            field,
            reason: format!("expected a {} finite value, got {v}", if allow_zero { "non-negative" } else { "positive" }),
        })
    }
}

impl PotentialSpec {
    /// Normalized sphere confinement with hinge radius ρ₀ and slope κ.
    pub fn sphere_confinement(d: usize, hinge_radius: f64, slope: f64) -> Result<Self, DynamicsError> {
        check_positive("hinge_radius", hinge_radius, true)?;
        check_positive("slope", slope, false)?;
        if d == 0 {
            return Err(DynamicsError::InvalidSetting {
                field: "d",
                reason: "dimension must be at least 1".into(),
            });
        }
        Ok(Self {
            kind: PotentialKind::SphereConfinement,
            d,
            hinge_radius,
            slope,
            normalization: log_partition(d, hinge_radius, slope),
        })
    }

    /// Particle confinement `φ(R^{d+1}(|x| − R))`.
    pub fn particle_confinement(d: usize, radius: f64) -> Result<Self, DynamicsError> {
        check_positive("radius", radius, false)?;
        Ok(Self {
            kind: PotentialKind::ParticleConfinement,
            d,
            hinge_radius: radius,
            slope: radius.powi(d as i32 + 1),
            normalization: 0.0,
        })
    }

    /// Replace the slope of a particle confinement; ψ̊ slopes are fixed at
    /// construction.
    pub fn with_particle_slope(mut self, slope: f64) -> Result<Self, DynamicsError> {
        check_positive("slope", slope, false)?;
        if self.kind != PotentialKind::ParticleConfinement {
            return Err(DynamicsError::InvalidSetting {
                field: "slope",
                reason: "only the particle confinement slope can be overridden".into(),
            });
        }
        self.slope = slope;
        Ok(self)
    }

    /// Value at `x`, writing the gradient into `grad`.
    pub fn value_and_grad_into(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let t = self.slope * (r - self.hinge_radius);
        let dphi = hinge_derivative(t);
        if r > 0.0 && dphi != 0.0 {
            let s = self.slope * dphi / r;
            for (g, c) in grad.iter_mut().zip(x) {
                *g = s * c;
            }
        } else {
            grad.iter_mut().for_each(|g| *g = 0.0);
        }
        self.normalization + hinge(t)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.normalization + hinge(self.slope * (r - self.hinge_radius))
    }

    /// Largest possible gradient norm.
    pub fn gradient_bound(&self) -> f64 {
        self.slope
    }
}

/// `(ψ(x), ∇ψ(x))`, with the gradient taken as zero at the origin.
pub fn psi_value_and_grad(spec: &PotentialSpec, x: &[f64]) -> (f64, Vec<f64>) {
    let mut g = vec![0.0; x.len()];
    let v = spec.value_and_grad_into(x, &mut g);
    (v, g)
}

/// `ln ∫ e^{−φ(κ(|x| − ρ₀))} dx` in radial form:
/// `S_{d−1} (ρ₀^d / d + ∫_{ρ₀}^{ρ₀+2/κ} r^{d−1} e^{−κ²(r−ρ₀)²/4} dr + tail)`,
/// with the exponential tail `∫_{ρ₀+2/κ}^∞ r^{d−1} e^{1 − κ(r−ρ₀)} dr` summed
/// in closed form.
fn log_partition(d: usize, rho0: f64, kappa: f64) -> f64 {
    let surface = d as f64 * v_unit_ball(d);
    let k = d - 1;
    let inner = rho0.powi(d as i32) / d as f64;
    let s = rho0 + 2.0 / kappa;
    let scale = s.max(1.0 / kappa).powi(k as i32) / kappa;
    let quad = integrate(
        |r: f64| r.powi(k as i32) * (-0.25 * (kappa * (r - rho0)).powi(2)).exp(),
        rho0,
        s,
        1e-15 * scale,
    );
    // ∫_s^∞ r^k e^{−κ(r−s)} dr = Σ_j k!/(k−j)! s^{k−j} / κ^{j+1}, times e^{−1}
    // since φ(2) = 1.
    let mut tail = 0.0;
    let mut falling = 1.0;
    for j in 0..=k {
        tail += falling * s.powi((k - j) as i32) / kappa.powi(j as i32 + 1);
        falling *= (k - j) as f64;
    }
    tail *= (-1.0f64).exp();
    (surface * (inner + quad + tail)).ln()
}
