//! Euler–Maruyama integrators for the two-type reflected SDE and for the
//! depletion gradient SDE of the spheres alone.

use rand::Rng;
use rand_distr::StandardNormal;

use super::potential::PotentialSpec;
use super::projection::{resolve_constraints, Mobility, ProjectionLedger, DEFAULT_MAX_PROJ_ITERS};
use crate::error::{BodyPair, DynamicsError};
use crate::geometry::energy::energy_gradient_into;
use crate::model::{is_admissible, Configuration, ModelParams, TOL_OVERLAP};
use crate::rng::{rng_from_seed, SimRng};

/// Prefactor in front of `∇ψ̊` (and of `ż∇E` for the depletion SDE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftConvention {
    /// `−½ σ̊ ∇ψ̊` for the two-type SDE and `−½ ∇ψ̊ − ½ ż ∇E` for the depletion
    /// SDE.
    #[default]
    AsPrinted,
    /// `−½ σ̊² ∇ψ̊` and `−½ σ̊² (∇ψ̊ + ż∇E)`.
    SigmaSquared,
}

/// Prefactor in front of `∇ψ̇^R` in the particle equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParticleDrift {
    /// `−½ σ̇² ∇ψ̇^R`.
    #[default]
    SigmaDotSquared,
    /// `−½ σ̇² σ̊ ∇ψ̇^R`.
    WithSphereSigma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsSettings {
    pub dt: f64,
    pub max_proj_iters: usize,
    pub drift: DriftConvention,
    pub particle_drift: ParticleDrift,
}

impl DynamicsSettings {
    pub fn new(dt: f64) -> Result<Self, DynamicsError> {
        let s = Self {
            dt,
            max_proj_iters: DEFAULT_MAX_PROJ_ITERS,
            drift: DriftConvention::default(),
            particle_drift: ParticleDrift::default(),
        };
        s.validate()?;
        Ok(s)
    }

    /// `10⁻⁴ (2r̊)² / σ̊²`, so a typical step moves a sphere by about 1 % of
    /// its diameter.
    pub fn default_dt(params: &ModelParams) -> f64 {
        let s2 = params.sigma_sphere * params.sigma_sphere;
        let diam2 = (2.0 * params.r_sphere).powi(2);
        if s2 > 0.0 {
            1e-4 * diam2 / s2
        } else {
            1e-4 * diam2
        }
    }

    pub fn with_drift(mut self, drift: DriftConvention) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_particle_drift(mut self, particle_drift: ParticleDrift) -> Self {
        self.particle_drift = particle_drift;
        self
    }

    pub fn with_max_proj_iters(mut self, iters: usize) -> Result<Self, DynamicsError> {
        self.max_proj_iters = iters;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(DynamicsError::InvalidSetting {
                field: "dt",
                reason: format!("time step must be positive, got {}", self.dt),
            });
        }
        if self.max_proj_iters == 0 {
            return Err(DynamicsError::InvalidSetting {
                field: "max_proj_iters",
                reason: "at least one projection sweep is required".into(),
            });
        }
        Ok(())
    }

    fn psi_coefficient(&self, params: &ModelParams, depletion: bool) -> f64 {
        let s = params.sigma_sphere;
        match (self.drift, depletion) {
            (DriftConvention::AsPrinted, false) => 0.5 * s,
            (DriftConvention::AsPrinted, true) => 0.5,
            (DriftConvention::SigmaSquared, _) => 0.5 * s * s,
        }
    }

    fn particle_coefficient(&self, params: &ModelParams) -> f64 {
        let base = 0.5 * params.sigma_particle * params.sigma_particle;
        match self.particle_drift {
            ParticleDrift::SigmaDotSquared => base,
            ParticleDrift::WithSphereSigma => base * params.sigma_sphere,
        }
    }
}

/// Confinement potentials for a run. The particle potential is only used by
/// the two-type SDE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potentials {
    pub sphere: PotentialSpec,
    pub particle: Option<PotentialSpec>,
}

/// Cumulative local times: `L` is symmetric `n × n` with zero diagonal, `ℓ`
/// is `n × m`, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimes {
    n: usize,
    m: usize,
    spheres: Vec<f64>,
    particles: Vec<f64>,
}

impl LocalTimes {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            spheres: vec![0.0; n * n],
            particles: vec![0.0; n * m],
        }
    }

    pub fn sphere(&self, i: usize, j: usize) -> f64 {
        self.spheres[i * self.n + j]
    }

    pub fn particle(&self, i: usize, k: usize) -> f64 {
        self.particles[i * self.m + k]
    }

    pub fn sphere_matrix(&self) -> &[f64] {
        &self.spheres
    }

    pub fn particle_matrix(&self) -> &[f64] {
        &self.particles
    }

    pub fn n_spheres(&self) -> usize {
        self.n
    }

    pub fn n_particles(&self) -> usize {
        self.m
    }

    fn credit(&mut self, ledger: &ProjectionLedger) {
        for c in &ledger.corrections {
            match c.pair {
                BodyPair::Spheres(i, j) => {
                    self.spheres[i * self.n + j] += c.local_time;
                    self.spheres[j * self.n + i] += c.local_time;
                }
                BodyPair::SphereParticle(i, k) => self.particles[i * self.m + k] += c.local_time,
            }
        }
    }
}

/// State carried from step to step.
#[derive(Debug, Clone)]
pub struct IntegratorState {
    pub cfg: Configuration,
    pub t: f64,
    pub step: u64,
    pub local_times: LocalTimes,
    pub rng: SimRng,
    /// Ledger of the most recent projection.
    pub last_ledger: ProjectionLedger,
    noise_buf: Vec<f64>,
    drift_buf: Vec<f64>,
}

impl IntegratorState {
    pub fn new(cfg: Configuration, seed: u64) -> Self {
        let lt = LocalTimes::zeros(cfg.n_spheres(), cfg.n_particles());
        Self {
            cfg,
            t: 0.0,
            step: 0,
            local_times: lt,
            rng: rng_from_seed(seed),
            last_ledger: ProjectionLedger::default(),
            noise_buf: Vec::new(),
            drift_buf: Vec::new(),
        }
    }

    fn draw_noise(&mut self, len: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend((0..len).map(|_| self.rng.sample::<f64, _>(StandardNormal)));
    }

    fn finish_step(&mut self, params: &ModelParams, mobility: Mobility, settings: &DynamicsSettings) -> Result<(), DynamicsError> {
        let ledger = resolve_constraints(&mut self.cfg, params, mobility, settings.max_proj_iters).map_err(|e| {
            DynamicsError::AtStep {
                step: self.step + 1,
                source: Box::new(e),
            }
        })?;
        self.local_times.credit(&ledger);
        self.last_ledger = ledger;
        self.t += settings.dt;
        self.step += 1;
        Ok(())
    }
}

fn add_confinement_drift(coords: &mut [f64], d: usize, spec: &PotentialSpec, coef: f64, grad: &mut [f64]) {
    if coef == 0.0 {
        return;
    }
    for x in coords.chunks_exact_mut(d) {
        spec.value_and_grad_into(x, grad);
        for k in 0..d {
            x[k] -= coef * grad[k];
        }
    }
}

/// One step of the two-type SDE using standard normal `noise` (spheres
/// first, then particles, one entry per coordinate).
pub fn step_two_type_with_noise(
    state: &mut IntegratorState,
    params: &ModelParams,
    potentials: &Potentials,
    settings: &DynamicsSettings,
    noise: &[f64],
) -> Result<(), DynamicsError> {
    let d = params.d;
    let ns = state.cfg.n_spheres() * d;
    let np = state.cfg.n_particles() * d;
    check_noise(noise.len(), ns + np)?;
    let dt = settings.dt;
    let sqdt = dt.sqrt();
    let mut grad = vec![0.0; d];

    let cs = settings.psi_coefficient(params, false) * dt;
    let cp = settings.particle_coefficient(params) * dt;
    let (spheres, particles) = state.cfg.bodies_mut();
    // Drift is evaluated at the start-of-step positions.
    add_confinement_drift(spheres, d, &potentials.sphere, cs, &mut grad);
    if let Some(pp) = &potentials.particle {
        add_confinement_drift(particles, d, pp, cp, &mut grad);
    }
    let (ss, sp) = (params.sigma_sphere * sqdt, params.sigma_particle * sqdt);
    for (x, xi) in spheres.iter_mut().zip(&noise[..ns]) {
        *x += ss * xi;
    }
    for (x, xi) in particles.iter_mut().zip(&noise[ns..]) {
        *x += sp * xi;
    }
    state.finish_step(params, Mobility::from_params(params), settings)
}

pub fn step_two_type(
    state: &mut IntegratorState,
    params: &ModelParams,
    potentials: &Potentials,
    settings: &DynamicsSettings,
) -> Result<(), DynamicsError> {
    let len = (state.cfg.n_spheres() + state.cfg.n_particles()) * params.d;
    let mut noise = std::mem::take(&mut state.noise_buf);
    state.draw_noise(len, &mut noise);
    let r = step_two_type_with_noise(state, params, potentials, settings, &noise);
    state.noise_buf = noise;
    r
}

/// Deterministic drift of the depletion SDE, `−c (∇ψ̊(x_i) + ż ∇_i E)` with
/// `c` set by the drift convention. This is descent on `ψ̊ + żE`: overlapping
/// depletion balls attract.
pub fn depletion_drift(
    spheres: &[f64],
    params: &ModelParams,
    psi: &PotentialSpec,
    settings: &DynamicsSettings,
) -> Result<Vec<f64>, DynamicsError> {
    let mut drift = vec![0.0; spheres.len()];
    depletion_drift_into(spheres, params, psi, settings, &mut drift)?;
    Ok(drift)
}

fn depletion_drift_into(
    spheres: &[f64],
    params: &ModelParams,
    psi: &PotentialSpec,
    settings: &DynamicsSettings,
    drift: &mut [f64],
) -> Result<(), DynamicsError> {
    let d = params.d;
    let c = settings.psi_coefficient(params, true);
    energy_gradient_into(spheres, params, drift)?;
    let mut small = [0.0; 4];
    let mut big = Vec::new();
    let grad: &mut [f64] = if d <= 4 {
        &mut small[..d]
    } else {
        big.resize(d, 0.0);
        &mut big
    };
    for (x, out) in spheres.chunks_exact(d).zip(drift.chunks_exact_mut(d)) {
        psi.value_and_grad_into(x, grad);
        for k in 0..d {
            out[k] = -c * (grad[k] + params.z_dot * out[k]);
        }
    }
    Ok(())
}

/// One step of the depletion SDE for the spheres, with supplied standard
/// normal noise. Particles in the configuration, if any, are ignored.
pub fn step_depletion_with_noise(
    state: &mut IntegratorState,
    params: &ModelParams,
    psi: &PotentialSpec,
    settings: &DynamicsSettings,
    noise: &[f64],
) -> Result<(), DynamicsError> {
    let ns = state.cfg.n_spheres() * params.d;
    check_noise(noise.len(), ns)?;
    let dt = settings.dt;
    let mut drift = std::mem::take(&mut state.drift_buf);
    drift.clear();
    drift.resize(ns, 0.0);
    depletion_drift_into(state.cfg.spheres(), params, psi, settings, &mut drift).map_err(|e| DynamicsError::AtStep {
        step: state.step + 1,
        source: Box::new(e),
    })?;
    let s = params.sigma_sphere * dt.sqrt();
    for ((x, f), xi) in state.cfg.spheres_mut().iter_mut().zip(&drift).zip(noise) {
        *x += f * dt + s * xi;
    }
    state.drift_buf = drift;
    // Only sphere pairs are constrained here.
    let mobility = Mobility {
        sphere: 1.0,
        particle: 0.0,
    };
    if state.cfg.n_particles() > 0 {
        let spheres_only = state.cfg.without_particles();
        let particles = state.cfg.particles().to_vec();
        state.cfg = spheres_only;
        let r = state.finish_step(params, mobility, settings);
        state.cfg.set_particles(particles)?;
        return r;
    }
    state.finish_step(params, mobility, settings)
}

pub fn step_depletion(
    state: &mut IntegratorState,
    params: &ModelParams,
    psi: &PotentialSpec,
    settings: &DynamicsSettings,
) -> Result<(), DynamicsError> {
    let len = state.cfg.n_spheres() * params.d;
    let mut noise = std::mem::take(&mut state.noise_buf);
    state.draw_noise(len, &mut noise);
    let r = step_depletion_with_noise(state, params, psi, settings, &noise);
    state.noise_buf = noise;
    r
}

fn check_noise(got: usize, want: usize) -> Result<(), DynamicsError> {
    if got != want {
        return Err(DynamicsError::InvalidSetting {
            field: "noise",
            reason: format!("expected {want} standard normal draws, got {got}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    TwoType,
    Depletion,
}

/// Snapshot emitted by [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub step: u64,
    pub t: f64,
    pub cfg: Configuration,
    pub local_times: LocalTimes,
}

/// Run `n_steps` steps from `initial`, calling `sink` with a snapshot at step
/// 0, every `record_every` steps, and at the final step. Returns the final
/// state.
#[allow(clippy::too_many_arguments)]
pub fn simulate<F: FnMut(&TrajectoryRecord)>(
    initial: &Configuration,
    params: &ModelParams,
    potentials: &Potentials,
    settings: &DynamicsSettings,
    mode: RunMode,
    n_steps: u64,
    record_every: u64,
    seed: u64,
    mut sink: F,
) -> Result<IntegratorState, DynamicsError> {
    settings.validate()?;
    params.validate()?;
    if record_every == 0 {
        return Err(DynamicsError::InvalidSetting {
            field: "record_every",
            reason: "must be at least 1".into(),
        });
    }
    let check_cfg = match mode {
        RunMode::TwoType => initial.clone(),
        RunMode::Depletion => initial.without_particles(),
    };
    if !is_admissible(&check_cfg, params, TOL_OVERLAP)? {
        return Err(DynamicsError::InadmissibleInitial);
    }
    let mut state = IntegratorState::new(initial.clone(), seed);
    let emit = |state: &IntegratorState, sink: &mut F| {
        sink(&TrajectoryRecord {
            step: state.step,
            t: state.t,
            cfg: state.cfg.clone(),
            local_times: state.local_times.clone(),
        })
    };
    emit(&state, &mut sink);
    for s in 1..=n_steps {
        match mode {
            RunMode::TwoType => step_two_type(&mut state, params, potentials, settings)?,
            RunMode::Depletion => step_depletion(&mut state, params, &potentials.sphere, settings)?,
        }
        if s % record_every == 0 || s == n_steps {
            emit(&state, &mut sink);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::energy_gradient;

    fn psi(d: usize) -> PotentialSpec {
        PotentialSpec::sphere_confinement(d, 10.0, 1.0).unwrap()
    }

    fn pots(d: usize) -> Potentials {
        Potentials {
            sphere: psi(d),
            particle: Some(PotentialSpec::particle_confinement(d, 4.0).unwrap()),
        }
    }

    #[test]
    fn touching_spheres_without_noise_stay_put() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let cfg = Configuration::spheres_only(2, vec![0.0, 0.0, 2.0, 0.0]).unwrap();
        let mut st = IntegratorState::new(cfg.clone(), 1);
        let s = DynamicsSettings::new(1e-3).unwrap();
        step_two_type_with_noise(&mut st, &p, &pots(2), &s, &[0.0; 4]).unwrap();
        assert_eq!(st.cfg, cfg);
        assert_eq!(st.local_times.sphere(0, 1), 0.0);
        assert_eq!(st.step, 1);
        assert!((st.t - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn forced_particle_overlap_is_split_by_mobility() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_diffusion(1.0, 2.0).unwrap();
        let rd = p.r_depletion();
        // Particle pushed 0.1 r⊙ into the shell.
        let cfg = Configuration::new(2, vec![0.0, 0.0], vec![0.9 * rd, 0.0]).unwrap();
        let mut st = IntegratorState::new(cfg, 1);
        let s = DynamicsSettings::new(1e-3).unwrap();
        step_two_type_with_noise(&mut st, &p, &pots(2), &s, &[0.0; 4]).unwrap();
        let gap = st.cfg.particle(0)[0] - st.cfg.sphere(0)[0];
        assert!((gap - rd).abs() <= TOL_OVERLAP * rd);
        let ratio = (st.cfg.particle(0)[0] - 0.9 * rd) / -st.cfg.sphere(0)[0];
        assert!((ratio - 4.0).abs() < 1e-9);
        assert!(st.local_times.particle(0, 0) > 0.0);
    }

    #[test]
    fn depletion_drift_pulls_pair_together() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_activity(3.0).unwrap();
        let dist = 2.1;
        let cfg = Configuration::spheres_only(2, vec![0.0, 0.0, dist, 0.0]).unwrap();
        let mut st = IntegratorState::new(cfg, 1);
        let dt = 1e-3;
        let s = DynamicsSettings::new(dt).unwrap();
        step_depletion_with_noise(&mut st, &p, &psi(2), &s, &[0.0; 4]).unwrap();
        let rd = p.r_depletion();
        let u = dist / (2.0 * rd);
        // v_1 = 2; each sphere moves half of ż v_1 r⊙ √(1 − u²) dt.
        let closing = 3.0 * 2.0 * rd * (1.0 - u * u).sqrt() * dt;
        let new_dist = st.cfg.sphere(1)[0] - st.cfg.sphere(0)[0];
        assert!(new_dist < dist);
        assert!((dist - new_dist - closing).abs() < 1e-14);
        assert!((st.cfg.sphere(0)[0] - closing / 2.0).abs() < 1e-15);
    }

    #[test]
    fn drift_matches_energy_gradient() {
        let p = ModelParams::new(2, 1.0, 0.12).unwrap().with_activity(2.5).unwrap();
        let spheres = vec![0.0, 0.0, 2.05, 0.1, 1.0, 1.9, 8.0, 8.5];
        let spec = PotentialSpec::sphere_confinement(2, 3.0, 2.0).unwrap();
        let s = DynamicsSettings::new(1e-3).unwrap();
        let drift = depletion_drift(&spheres, &p, &spec, &s).unwrap();
        let g = energy_gradient(&spheres, &p).unwrap();
        for i in 0..4 {
            let (_, gp) = crate::dynamics::psi_value_and_grad(&spec, &spheres[2 * i..2 * i + 2]);
            for k in 0..2 {
                let want = -0.5 * gp[k] + 0.5 * p.z_dot * -g[2 * i + k];
                assert!((drift[2 * i + k] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sigma_squared_convention_scales_drift() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_activity(1.0).unwrap().with_diffusion(2.0, 1.0).unwrap();
        let spheres = vec![0.0, 0.0, 2.1, 0.0];
        let spec = psi(2);
        let a = depletion_drift(&spheres, &p, &spec, &DynamicsSettings::new(1e-3).unwrap()).unwrap();
        let b = depletion_drift(
            &spheres,
            &p,
            &spec,
            &DynamicsSettings::new(1e-3).unwrap().with_drift(DriftConvention::SigmaSquared),
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y - 4.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_noise_zero_drift_is_stationary() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_diffusion(0.0, 0.0).unwrap();
        let cfg = Configuration::new(2, vec![0.0, 0.0, 2.5, 0.0], vec![0.0, 1.5, 1.0, -3.0]).unwrap();
        let mut st = IntegratorState::new(cfg.clone(), 5);
        let s = DynamicsSettings::new(1e-2).unwrap();
        for _ in 0..100 {
            step_two_type(&mut st, &p, &pots(2), &s).unwrap();
        }
        assert_eq!(st.cfg, cfg);
    }

    #[test]
    fn simulate_zero_steps_and_determinism() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let cfg = Configuration::new(2, vec![0.0, 0.0, 2.2, 0.0], vec![0.0, 2.0]).unwrap();
        let s = DynamicsSettings::new(1e-3).unwrap();
        let mut recs = Vec::new();
        simulate(&cfg, &p, &pots(2), &s, RunMode::TwoType, 0, 10, 9, |r| recs.push(r.clone())).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].cfg, cfg);

        let run = || {
            let mut v = Vec::new();
            simulate(&cfg, &p, &pots(2), &s, RunMode::TwoType, 200, 7, 9, |r| v.push(r.clone())).unwrap();
            v
        };
        let (a, b) = (run(), run());
        assert_eq!(a.len(), 200 / 7 + 2);
        assert_eq!(a, b);
    }

    #[test]
    fn simulate_rejects_overlapping_start() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let cfg = Configuration::spheres_only(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let s = DynamicsSettings::new(1e-3).unwrap();
        let r = simulate(&cfg, &p, &pots(2), &s, RunMode::Depletion, 10, 1, 0, |_| {});
        assert_eq!(r.unwrap_err(), DynamicsError::InadmissibleInitial);
    }

    #[test]
    fn settings_validation() {
        assert!(DynamicsSettings::new(0.0).is_err());
        assert!(DynamicsSettings::new(f64::NAN).is_err());
        assert!(DynamicsSettings::new(1e-3).unwrap().with_max_proj_iters(0).is_err());
        let p = ModelParams::new(3, 0.5, 0.05).unwrap();
        assert!((DynamicsSettings::default_dt(&p) - 1e-4).abs() < 1e-18);
    }
}
