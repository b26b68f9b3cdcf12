//! Single-sphere Metropolis chain for `e^{−żE} 1_𝒟 Π e^{−ψ̊(x_i)}`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::PotentialSpec;
use crate::error::SamplingError;
use crate::geometry::{energy_pairwise, pair_energy_of};
use crate::model::{dist2, is_admissible, Configuration, ModelParams, TOL_OVERLAP};
use crate::rng::{rng_from_seed, SimRng};

/// Acceptance rate the burn-in adaptation steers towards.
pub const TARGET_ACCEPTANCE: f64 = 0.3;

/// Sweeps per adaptation window.
pub const ADAPT_WINDOW: usize = 20;

/// Smallest proposal scale, relative to r̊, before the chain gives up.
const MIN_PROPOSAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCMCParams {
    pub proposal_sigma: f64,
    /// Total sweeps, burn-in included. One sweep is `n` proposals.
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    /// Tune `proposal_sigma` towards 30 % acceptance during burn-in.
    pub adapt: bool,
}

impl MCMCParams {
    pub fn new(proposal_sigma: f64, n_sweeps: usize, burn_in: usize, thinning: usize) -> Result<Self, SamplingError> {
        let p = Self {
            proposal_sigma,
            n_sweeps,
            burn_in,
            thinning,
            adapt: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_adapt(mut self, adapt: bool) -> Self {
        self.adapt = adapt;
        self
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        let bad = |field, reason: String| Err(SamplingError::InvalidParameter { field, reason });
        if !(self.proposal_sigma.is_finite() && self.proposal_sigma > 0.0) {
            return bad("proposal_sigma", format!("must be positive, got {}", self.proposal_sigma));
        }
        if self.burn_in >= self.n_sweeps {
            return bad(
                "burn_in",
                format!("burn-in ({}) must be shorter than the run ({} sweeps)", self.burn_in, self.n_sweeps),
            );
        }
        if self.thinning == 0 {
            return bad("thinning", "must be at least 1".into());
        }
        Ok(())
    }

    /// Number of states a run emits.
    pub fn n_samples(&self) -> usize {
        (self.n_sweeps - self.burn_in) / self.thinning
    }
}

/// `min(1, e^{log_ratio})`.
pub fn metropolis_accept_prob(log_ratio: f64) -> f64 {
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

/// `n` spheres laid out on a cubic grid of spacing `2.2 r̊` centered at the
/// origin; always admissible.
pub fn grid_start(n: usize, params: &ModelParams) -> Vec<f64> {
    let d = params.d;
    let side = (n as f64).powf(1.0 / d as f64).ceil().max(1.0) as usize;
    let spacing = 2.2 * params.r_sphere;
    let shift = 0.5 * (side as f64 - 1.0) * spacing;
    let mut out = Vec::with_capacity(n * d);
    for i in 0..n {
        let mut rest = i;
        for _ in 0..d {
            out.push((rest % side) as f64 * spacing - shift);
            rest /= side;
        }
    }
    out
}

/// Chain state. Optionally the spheres must also avoid a fixed set of
/// particles (used by the two-type Gibbs sampler, where `z` is then zero).
#[derive(Debug, Clone)]
pub struct HardSphereChain {
    pub params: ModelParams,
    pub psi: PotentialSpec,
    pub z: f64,
    spheres: Vec<f64>,
    energy: f64,
    psi_total: f64,
    sigma: f64,
    rng: SimRng,
    accepted: u64,
    proposed: u64,
    log_hook: Option<Vec<f64>>,
    long_jump: Option<(f64, f64)>,
    window_acc: u64,
    window_prop: u64,
}

impl HardSphereChain {
    pub fn new(
        spheres: Vec<f64>,
        params: ModelParams,
        psi: PotentialSpec,
        z: f64,
        proposal_sigma: f64,
        seed: u64,
    ) -> Result<Self, SamplingError> {
        params.validate()?;
        if !(z.is_finite() && z >= 0.0) {
            return Err(SamplingError::InvalidParameter {
                field: "z",
                reason: format!("activity must be non-negative, got {z}"),
            });
        }
        let cfg = Configuration::spheres_only(params.d, spheres)?;
        if !is_admissible(&cfg, &params, TOL_OVERLAP)? {
            return Err(SamplingError::InadmissibleStart);
        }
        let (_, spheres, _) = cfg.into_parts();
        let mut c = Self {
            params,
            psi,
            z,
            spheres,
            energy: 0.0,
            psi_total: 0.0,
            sigma: proposal_sigma,
            rng: rng_from_seed(seed),
            accepted: 0,
            proposed: 0,
            log_hook: None,
            long_jump: None,
            window_acc: 0,
            window_prop: 0,
        };
        c.refresh();
        Ok(c)
    }

    /// Recompute cached energies from scratch.
    pub fn refresh(&mut self) {
        self.energy = energy_pairwise(&self.spheres, &self.params);
        self.psi_total = self.spheres.chunks_exact(self.params.d).map(|x| self.psi.value(x)).sum();
    }

    pub fn spheres(&self) -> &[f64] {
        &self.spheres
    }

    pub fn n_spheres(&self) -> usize {
        self.spheres.len() / self.params.d
    }

    /// Pairwise energy E of the current state.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Σ ψ̊(x_i) of the current state.
    pub fn psi_total(&self) -> f64 {
        self.psi_total
    }

    pub fn proposal_sigma(&self) -> f64 {
        self.sigma
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// With probability `prob`, draw the displacement at the fixed `scale`
    /// instead of the adapted one. The mixture stays symmetric. Long jumps
    /// do not count towards adaptation.
    pub fn set_long_jumps(&mut self, prob: f64, scale: f64) -> Result<(), SamplingError> {
        if !(prob.is_finite() && (0.0..1.0).contains(&prob) && scale.is_finite() && scale > 0.0) {
            return Err(SamplingError::InvalidParameter {
                field: "long_jump",
                reason: format!("need prob in [0, 1) and positive scale, got ({prob}, {scale})"),
            });
        }
        self.long_jump = (prob > 0.0).then_some((prob, scale));
        Ok(())
    }

    /// Record the log acceptance ratio of every admissible proposal.
    pub fn record_log_ratios(&mut self) {
        self.log_hook = Some(Vec::new());
    }

    pub fn logged_ratios(&self) -> &[f64] {
        self.log_hook.as_deref().unwrap_or(&[])
    }

    /// Log Metropolis ratio for moving sphere `i` to `new`, or `None` if the
    /// move breaks a hard-core constraint (against spheres, or against
    /// `particles` when given). Only terms involving sphere `i` are evaluated.
    pub fn log_acceptance(&self, i: usize, new: &[f64], particles: Option<&[f64]>) -> Option<f64> {
        self.move_deltas(i, new, particles).map(|(de, dp)| -self.z * de - dp)
    }

    /// `(ΔE, Δψ̊)` of a hard-core-compatible move.
    fn move_deltas(&self, i: usize, new: &[f64], particles: Option<&[f64]>) -> Option<(f64, f64)> {
        let d = self.params.d;
        let contact2 = self.params.contact_distance().powi(2);
        for (j, xj) in self.spheres.chunks_exact(d).enumerate() {
            if j != i && dist2(new, xj) < contact2 {
                return None;
            }
        }
        if let Some(ps) = particles {
            let rd2 = self.params.r_depletion().powi(2);
            if ps.chunks_exact(d).any(|xk| dist2(new, xk) < rd2) {
                return None;
            }
        }
        let old = &self.spheres[i * d..(i + 1) * d];
        let d_psi = self.psi.value(new) - self.psi.value(old);
        let d_energy = if self.z > 0.0 {
            pair_energy_of(&self.spheres, i, new, &self.params) - pair_energy_of(&self.spheres, i, old, &self.params)
        } else {
            0.0
        };
        Some((d_energy, d_psi))
    }

    /// One single-sphere proposal. Returns whether it was accepted.
    pub fn propose(&mut self, particles: Option<&[f64]>) -> bool {
        let d = self.params.d;
        let n = self.n_spheres();
        if n == 0 {
            return false;
        }
        let i = self.rng.random_range(0..n);
        let mut new = [0.0; 8];
        let mut new_vec;
        let new: &mut [f64] = if d <= 8 {
            &mut new[..d]
        } else {
            new_vec = vec![0.0; d];
            &mut new_vec
        };
        let long = match self.long_jump {
            Some((p, _)) => self.rng.random::<f64>() < p,
            None => false,
        };
        let scale = if long { self.long_jump.map_or(self.sigma, |j| j.1) } else { self.sigma };
        for k in 0..d {
            let xi: f64 = self.rng.sample(StandardNormal);
            new[k] = self.spheres[i * d + k] + scale * xi;
        }
        self.proposed += 1;
        if !long {
            self.window_prop += 1;
        }
        let Some((d_energy, d_psi)) = self.move_deltas(i, new, particles) else {
            return false;
        };
        let log_ratio = -self.z * d_energy - d_psi;
        if let Some(h) = self.log_hook.as_mut() {
            h.push(log_ratio);
        }
        let accept = log_ratio >= 0.0 || self.rng.random::<f64>() < log_ratio.exp();
        if accept {
            self.energy += d_energy;
            self.psi_total += d_psi;
            self.spheres[i * d..(i + 1) * d].copy_from_slice(new);
            self.accepted += 1;
            if !long {
                self.window_acc += 1;
            }
        }
        accept
    }

    /// `n` proposals; returns the number accepted.
    pub fn sweep(&mut self, particles: Option<&[f64]>) -> usize {
        (0..self.n_spheres()).filter(|_| self.propose(particles)).count()
    }

    /// Adjust the proposal scale from the acceptance of local moves since the
    /// last call. A window without any acceptance halves the scale whether or
    /// not adaptation is on.
    fn tune(&mut self, adapt: bool) -> Result<(), SamplingError> {
        let (acc, prop) = (self.window_acc, self.window_prop);
        self.window_acc = 0;
        self.window_prop = 0;
        if prop == 0 {
            return Ok(());
        }
        let rate = acc as f64 / prop as f64;
        if rate == 0.0 {
            self.sigma *= 0.5;
        } else if adapt {
            self.sigma *= (2.0 * (rate - TARGET_ACCEPTANCE)).exp();
            self.sigma = self.sigma.min(10.0 * self.params.r_sphere);
        }
        if self.sigma < MIN_PROPOSAL * self.params.r_sphere {
            return Err(SamplingError::ProposalUnderflow(self.sigma));
        }
        Ok(())
    }

    /// Run `mcmc` from the current state. `sweep` performs one sweep (and
    /// any extra update of the caller-owned `aux` state); `sink(sweep_index,
    /// chain, aux)` sees every emitted state.
    pub fn run_with<S, G, F>(&mut self, mcmc: &MCMCParams, aux: &mut S, mut sweep: G, mut sink: F) -> Result<(), SamplingError>
    where
        G: FnMut(&mut HardSphereChain, &mut S),
        F: FnMut(usize, &HardSphereChain, &S),
    {
        mcmc.validate()?;
        self.window_acc = 0;
        self.window_prop = 0;
        for s in 0..mcmc.n_sweeps {
            sweep(self, aux);
            if (s + 1) % ADAPT_WINDOW == 0 {
                self.tune(mcmc.adapt && s < mcmc.burn_in)?;
                // Keep rounding drift in the running energy in check.
                self.refresh();
            }
            if s >= mcmc.burn_in && (s - mcmc.burn_in + 1) % mcmc.thinning == 0 {
                sink(s, self, aux);
            }
        }
        Ok(())
    }

    /// Plain Metropolis run without particles.
    pub fn run<F: FnMut(usize, &HardSphereChain)>(&mut self, mcmc: &MCMCParams, mut sink: F) -> Result<(), SamplingError> {
        self.run_with(mcmc, &mut (), |c, _| { c.sweep(None); }, |s, c, _| sink(s, c))
    }
}

/// Output of a sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub samples: Vec<Configuration>,
    pub energies: Vec<f64>,
    pub acceptance_rate: f64,
    pub final_proposal_sigma: f64,
}

/// Metropolis samples of `e^{−zE} 1_𝒟 Π e^{−ψ̊(x_i)}` for `n` spheres,
/// started from [`grid_start`].
pub fn sample_hard_spheres(
    n: usize,
    params: &ModelParams,
    psi: &PotentialSpec,
    mcmc: &MCMCParams,
    z: f64,
    seed: u64,
) -> Result<SampleRun, SamplingError> {
    sample_hard_spheres_from(grid_start(n, params), params, psi, mcmc, z, seed)
}

pub fn sample_hard_spheres_from(
    start: Vec<f64>,
    params: &ModelParams,
    psi: &PotentialSpec,
    mcmc: &MCMCParams,
    z: f64,
    seed: u64,
) -> Result<SampleRun, SamplingError> {
    let mut chain = HardSphereChain::new(start, *params, *psi, z, mcmc.proposal_sigma, seed)?;
    let mut samples = Vec::with_capacity(mcmc.n_samples());
    let mut energies = Vec::with_capacity(mcmc.n_samples());
    let d = params.d;
    chain.run(mcmc, |_, c| {
        samples.push(Configuration::spheres_only(d, c.spheres().to_vec()).expect("stride is d"));
        energies.push(c.energy());
    })?;
    Ok(SampleRun {
        samples,
        energies,
        acceptance_rate: chain.acceptance_rate(),
        final_proposal_sigma: chain.proposal_sigma(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi() -> PotentialSpec {
        PotentialSpec::sphere_confinement(2, 2.0, 1.0).unwrap()
    }

    #[test]
    fn three_state_detailed_balance() {
        // Uniform proposals among three states with energies e; the Metropolis
        // kernel must leave the Boltzmann weights invariant.
        let e = [0.3, -1.2, 2.0];
        let w: Vec<f64> = e.iter().map(|x: &f64| (-x).exp()).collect();
        let zsum: f64 = w.iter().sum();
        let pi: Vec<f64> = w.iter().map(|x| x / zsum).collect();
        let mut p = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    p[a][b] = 0.5 * metropolis_accept_prob(-(e[b] - e[a]));
                }
            }
            p[a][a] = 1.0 - p[a].iter().sum::<f64>();
        }
        for b in 0..3 {
            let flow: f64 = (0..3).map(|a| pi[a] * p[a][b]).sum();
            assert!((flow - pi[b]).abs() < 1e-12);
        }
        for a in 0..3 {
            for b in 0..3 {
                assert!((pi[a] * p[a][b] - pi[b] * p[b][a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_start_is_admissible() {
        for d in [2, 3] {
            let p = ModelParams::new(d, 1.0, 0.1).unwrap();
            for n in 1..20 {
                let s = grid_start(n, &p);
                assert_eq!(s.len(), n * d);
                let cfg = Configuration::spheres_only(d, s).unwrap();
                assert!(is_admissible(&cfg, &p, 0.0).unwrap());
            }
        }
    }

    #[test]
    fn local_ratio_matches_full_recomputation() {
        let p = ModelParams::new(2, 1.0, 0.12).unwrap();
        let start = vec![0.0, 0.0, 2.05, 0.0, 1.0, 1.8];
        let chain = HardSphereChain::new(start.clone(), p, psi(), 4.0, 0.1, 1).unwrap();
        let new = [2.08, 0.05];
        let local = chain.log_acceptance(1, &new, None).unwrap();
        let mut moved = start.clone();
        moved[2..4].copy_from_slice(&new);
        let psi_sum = |s: &[f64]| s.chunks(2).map(|x| psi().value(x)).sum::<f64>();
        let full = -4.0 * (energy_pairwise(&moved, &p) - energy_pairwise(&start, &p)) - (psi_sum(&moved) - psi_sum(&start));
        assert!((local - full).abs() < 1e-12);
        assert_eq!(chain.log_acceptance(1, &[0.5, 0.0], None), None);
    }

    #[test]
    fn running_energy_tracks_state() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let mut chain = HardSphereChain::new(grid_start(4, &p), p, psi(), 20.0, 0.3, 3).unwrap();
        for _ in 0..500 {
            chain.sweep(None);
        }
        let e = chain.energy();
        chain.refresh();
        assert!((e - chain.energy()).abs() < 1e-10);
    }

    #[test]
    fn parameter_validation() {
        assert!(MCMCParams::new(0.0, 10, 1, 1).is_err());
        assert!(MCMCParams::new(0.1, 10, 10, 1).is_err());
        assert!(MCMCParams::new(0.1, 10, 1, 0).is_err());
        assert_eq!(MCMCParams::new(0.1, 100, 10, 3).unwrap().n_samples(), 30);
    }

    #[test]
    fn inadmissible_start_is_rejected() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let r = HardSphereChain::new(vec![0.0, 0.0, 1.0, 0.0], p, psi(), 1.0, 0.1, 0);
        assert_eq!(r.unwrap_err(), SamplingError::InadmissibleStart);
    }

    #[test]
    fn stuck_chain_halves_until_underflow() {
        // A sphere ringed by particles at contact cannot move at all.
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let mut chain = HardSphereChain::new(vec![0.0, 0.0], p, psi(), 0.0, 1.0, 0).unwrap();
        let rd = p.r_depletion();
        let mut ring: Vec<f64> = (0..64)
            .flat_map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 64.0;
                [rd * a.cos(), rd * a.sin()]
            })
            .collect();
        // Also fill the surroundings so that long jumps land on particles.
        for a in -40..=40 {
            for b in -40..=40 {
                let x = [a as f64 * 0.5, b as f64 * 0.5];
                if x[0].hypot(x[1]) > rd + 0.3 {
                    ring.extend(x);
                }
            }
        }
        let mcmc = MCMCParams::new(1.0, 100_000, 10, 1).unwrap();
        let r = chain.run_with(&mcmc, &mut ring, |c, ring| { c.sweep(Some(ring)); }, |_, _, _| {});
        assert!(matches!(r, Err(SamplingError::ProposalUnderflow(_))));
    }

    #[test]
    fn emits_expected_count_and_stays_admissible() {
        let p = ModelParams::new(3, 1.0, 0.1).unwrap();
        let mcmc = MCMCParams::new(0.5, 300, 100, 4).unwrap();
        let spec = PotentialSpec::sphere_confinement(3, 2.0, 1.0).unwrap();
        let run = sample_hard_spheres(3, &p, &spec, &mcmc, 10.0, 11).unwrap();
        assert_eq!(run.samples.len(), 50);
        for c in &run.samples {
            assert!(is_admissible(c, &p, 0.0).unwrap());
        }
    }
}
