//! Activity annealing towards minimal-energy (maximal-contact) packings, and
//! the concentration of the equilibrium law near the minimum.

use super::metropolis::{grid_start, HardSphereChain, MCMCParams};
use crate::dynamics::PotentialSpec;
use crate::error::SamplingError;
use crate::geometry::{minimal_energy, OverlapPotential};
use crate::model::{contact_number, Configuration, ModelParams, EPS_CONTACT_ANNEAL};
use crate::rng::substream_seed;

/// Sweeps per level of [`AnnealSchedule::default_for`].
pub const DEFAULT_SWEEPS_PER_LEVEL: usize = 1_000_000;

/// Share of annealing and concentration proposals drawn at scale `r̊` rather
/// than the adapted one.
pub const LONG_JUMP_PROB: f64 = 0.5;

/// Geometric activity ladder `z_k = z_initial · γ^k`, `k = 0..n_levels`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub z_initial: f64,
    pub growth: f64,
    pub n_levels: usize,
    pub sweeps_per_level: usize,
}

impl AnnealSchedule {
    pub fn new(z_initial: f64, growth: f64, n_levels: usize, sweeps_per_level: usize) -> Result<Self, SamplingError> {
        let s = Self {
            z_initial,
            growth,
            n_levels,
            sweeps_per_level,
        };
        s.validate()?;
        Ok(s)
    }

    /// `z_initial = 1/𝓥*`, `γ = 3`, eight levels.
    pub fn default_for(params: &ModelParams) -> Self {
        let vstar = OverlapPotential::from_params(params).max_value();
        Self {
            z_initial: 1.0 / vstar,
            growth: 3.0,
            n_levels: 8,
            sweeps_per_level: DEFAULT_SWEEPS_PER_LEVEL,
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        let bad = |field, reason: &str| {
            Err(SamplingError::InvalidParameter {
                field,
                reason: reason.into(),
            })
        };
        if !(self.z_initial.is_finite() && self.z_initial > 0.0) {
            return bad("z_initial", "must be positive");
        }
        if !(self.growth.is_finite() && self.growth > 1.0) {
            return bad("growth", "must exceed 1");
        }
        if self.n_levels == 0 {
            return bad("n_levels", "must be at least 1");
        }
        if self.sweeps_per_level < 2 {
            return bad("sweeps_per_level", "must be at least 2");
        }
        Ok(())
    }

    pub fn activity(&self, level: usize) -> f64 {
        self.z_initial * self.growth.powi(level as i32)
    }
}

/// Weak confinement used while annealing: slope `0.1 / r̊`, hinge at
/// `2 r̊ n^{1/d}`, about the radius of a compact cluster.
pub fn annealing_psi(n: usize, params: &ModelParams) -> PotentialSpec {
    let r = params.r_sphere;
    let hinge = 2.0 * r * (n.max(1) as f64).powf(1.0 / params.d as f64);
    PotentialSpec::sphere_confinement(params.d, hinge, 0.1 / r).expect("positive slope and hinge")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    /// Lowest-energy configuration seen over all levels.
    pub best: Configuration,
    /// Its pairwise energy E (without ψ̊).
    pub best_energy: f64,
    /// Its Σ ψ̊, reported separately.
    pub best_psi: f64,
    /// Contact number (at [`EPS_CONTACT_ANNEAL`]) of the best state after each level.
    pub contact_history: Vec<usize>,
}

impl AnnealResult {
    pub fn final_contacts(&self) -> usize {
        self.contact_history.last().copied().unwrap_or(0)
    }
}

/// Anneal with [`annealing_psi`].
pub fn anneal_packing(
    n: usize,
    params: &ModelParams,
    schedule: &AnnealSchedule,
    mcmc: &MCMCParams,
    seed: u64,
) -> Result<AnnealResult, SamplingError> {
    anneal_packing_with_psi(n, params, &annealing_psi(n, params), schedule, mcmc, seed)
}

/// Metropolis at each activity of `schedule`, each level starting from the
/// best state found so far. Only `mcmc.proposal_sigma` and `mcmc.adapt` are
/// used: every level runs `sweeps_per_level` sweeps, adapting the proposal
/// during its first half.
pub fn anneal_packing_with_psi(
    n: usize,
    params: &ModelParams,
    psi: &PotentialSpec,
    schedule: &AnnealSchedule,
    mcmc: &MCMCParams,
    seed: u64,
) -> Result<AnnealResult, SamplingError> {
    schedule.validate()?;
    mcmc.validate()?;
    let d = params.d;
    let mut best = grid_start(n, params);
    let mut best_energy = crate::geometry::energy_pairwise(&best, params);
    let mut best_psi: f64 = best.chunks_exact(d).map(|x| psi.value(x)).sum();
    let mut sigma = mcmc.proposal_sigma;
    let mut history = Vec::with_capacity(schedule.n_levels);

    for level in 0..schedule.n_levels {
        let z = schedule.activity(level);
        let mut chain = HardSphereChain::new(best.clone(), *params, *psi, z, sigma, substream_seed(seed, level as u64))?;
        chain.set_long_jumps(LONG_JUMP_PROB, params.r_sphere)?;
        let level_mcmc = MCMCParams {
            proposal_sigma: sigma,
            n_sweeps: schedule.sweeps_per_level,
            burn_in: schedule.sweeps_per_level / 2,
            thinning: 1,
            adapt: mcmc.adapt,
        };
        let mut track = (best.clone(), best_energy, best_psi);
        chain.run_with(
            &level_mcmc,
            &mut track,
            |c, t| {
                c.sweep(None);
                if c.energy() < t.1 {
                    *t = (c.spheres().to_vec(), c.energy(), c.psi_total());
                }
            },
            |_, _, _| {},
        )?;
        (best, best_energy, best_psi) = track;
        sigma = chain.proposal_sigma();
        history.push(contact_number(&best, params, EPS_CONTACT_ANNEAL));
    }
    Ok(AnnealResult {
        best: Configuration::spheres_only(d, best)?,
        best_energy,
        best_psi,
        contact_history: history,
    })
}

/// For each activity in `z_list` (run in the given order, each chain starting
/// where the previous one ended), the fraction of emitted samples with
/// `E ≤ E_* + eta`. Proposals mix local and `r̊`-scale moves as in
/// [`anneal_packing_with_psi`].
pub fn concentration_estimate(
    n: usize,
    params: &ModelParams,
    psi: &PotentialSpec,
    z_list: &[f64],
    eta: f64,
    mcmc: &MCMCParams,
    seed: u64,
) -> Result<Vec<f64>, SamplingError> {
    if eta.is_nan() || eta < 0.0 {
        return Err(SamplingError::InvalidParameter {
            field: "eta",
            reason: format!("must be non-negative, got {eta}"),
        });
    }
    let e_star = minimal_energy(n, params)?.value;
    let threshold = e_star + eta;
    let mut state = grid_start(n, params);
    let mut sigma = mcmc.proposal_sigma;
    let mut out = Vec::with_capacity(z_list.len());
    for (level, &z) in z_list.iter().enumerate() {
        let mut chain = HardSphereChain::new(state, *params, *psi, z, sigma, substream_seed(seed, level as u64))?;
        chain.set_long_jumps(LONG_JUMP_PROB, params.r_sphere)?;
        let run = MCMCParams {
            proposal_sigma: sigma,
            ..*mcmc
        };
        let (mut hits, mut total) = (0usize, 0usize);
        chain.run(&run, |_, c| {
            total += 1;
            if c.energy() <= threshold {
                hits += 1;
            }
        })?;
        out.push(hits as f64 / total.max(1) as f64);
        state = chain.spheres().to_vec();
        sigma = chain.proposal_sigma();
    }
    Ok(out)
}
