//! Poisson particle baths conditioned on the sphere positions, and the Gibbs
//! sampler for the joint sphere/particle law.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::metropolis::{grid_start, HardSphereChain, MCMCParams, SampleRun};
use crate::dynamics::PotentialSpec;
use crate::error::SamplingError;
use crate::geometry::{energy_pairwise, v_unit_ball};
use crate::model::{dist2, Configuration, ModelParams};
use crate::rng::{rng_from_seed, substream_seed, SimRng};

/// Beyond `R + BATH_MARGIN / slope` the weight `e^{−ψ̇^R}` is below `e^{−39}`.
const BATH_MARGIN: f64 = 40.0;

fn uniform_in_ball<R: Rng>(rng: &mut R, d: usize, radius: f64, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for o in out.iter_mut() {
            *o = rng.sample(StandardNormal);
            norm2 += *o * *o;
        }
        if norm2 > 0.0 {
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64) / norm2.sqrt();
            out.iter_mut().for_each(|o| *o *= r);
            return;
        }
    }
}

/// Poisson points of intensity `params.z_dot` in the ball of radius
/// `window_radius` about the origin, with every point inside a depletion ball
/// removed, and (when `weight` is given) each survivor kept with probability
/// `e^{−ψ(x)}`.
pub fn sample_bath_with<R: Rng>(
    spheres: &[f64],
    params: &ModelParams,
    window_radius: f64,
    weight: Option<&PotentialSpec>,
    rng: &mut R,
) -> Vec<f64> {
    let d = params.d;
    let mean = params.z_dot * v_unit_ball(d) * window_radius.powi(d as i32);
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    let rd2 = params.r_depletion().powi(2);
    let mut out = Vec::with_capacity(count * d);
    let mut x = vec![0.0; d];
    for _ in 0..count {
        uniform_in_ball(rng, d, window_radius, &mut x);
        if spheres.chunks_exact(d).any(|c| dist2(&x, c) < rd2) {
            continue;
        }
        if let Some(w) = weight {
            let psi = w.value(&x);
            if psi > 0.0 && rng.random::<f64>() >= (-psi).exp() {
                continue;
            }
        }
        out.extend_from_slice(&x);
    }
    out
}

/// Exclusion-thinned Poisson bath in the ball of radius `window_radius`.
pub fn sample_bath_given_spheres(spheres: &[f64], params: &ModelParams, window_radius: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    sample_bath_with(spheres, params, window_radius, None, &mut rng)
}

/// Starting state for the two-type dynamics: spheres from [`grid_start`] and
/// an exclusion-thinned bath of activity `params.z_dot` in the ball of radius
/// `bath_radius`.
pub fn two_type_start(n: usize, params: &ModelParams, bath_radius: f64, seed: u64) -> Result<Configuration, SamplingError> {
    let spheres = grid_start(n, params);
    let particles = sample_bath_given_spheres(&spheres, params, bath_radius, seed);
    Ok(Configuration::new(params.d, spheres, particles)?)
}

/// Radius outside which the particle confinement removes essentially every
/// point.
pub fn bath_window(particle_psi: &PotentialSpec) -> f64 {
    particle_psi.hinge_radius + BATH_MARGIN / particle_psi.slope
}

/// Gibbs sampler for `n` spheres with confinement `psi` in a bath of activity
/// `params.z_dot` confined by `ψ̇^R` with `R = bath_radius`.
///
/// Each sweep moves the spheres by Metropolis with the current bath held
/// fixed (hard-core exclusion plus ψ̊), then redraws the whole bath exactly.
pub fn sample_two_type(
    n: usize,
    params: &ModelParams,
    psi: &PotentialSpec,
    bath_radius: f64,
    mcmc: &MCMCParams,
    seed: u64,
) -> Result<SampleRun, SamplingError> {
    let particle_psi =
        PotentialSpec::particle_confinement(params.d, bath_radius).map_err(|e| SamplingError::InvalidParameter {
            field: "bath_radius",
            reason: e.to_string(),
        })?;
    let window = bath_window(&particle_psi);
    let mut chain = HardSphereChain::new(grid_start(n, params), *params, *psi, 0.0, mcmc.proposal_sigma, seed)?;
    let mut bath_rng: SimRng = rng_from_seed(substream_seed(seed, 1));
    let mut bath = sample_bath_with(chain.spheres(), params, window, Some(&particle_psi), &mut bath_rng);

    let d = params.d;
    let mut samples = Vec::with_capacity(mcmc.n_samples());
    let mut energies = Vec::with_capacity(mcmc.n_samples());
    chain.run_with(
        mcmc,
        &mut bath,
        |c, bath| {
            c.sweep(Some(bath));
            *bath = sample_bath_with(c.spheres(), params, window, Some(&particle_psi), &mut bath_rng);
        },
        |_, c, bath| {
            energies.push(energy_pairwise(c.spheres(), params));
            samples.push(Configuration::new(d, c.spheres().to_vec(), bath.clone()).expect("stride is d"));
        },
    )?;
    Ok(SampleRun {
        samples,
        energies,
        acceptance_rate: chain.acceptance_rate(),
        final_proposal_sigma: chain.proposal_sigma(),
    })
}
