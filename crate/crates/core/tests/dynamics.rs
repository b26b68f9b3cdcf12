mod common;

use std::f64::consts::PI;

use common::{random_admissible, rng};
use depletion_core::dynamics::*;
use depletion_core::error::BodyPair;
use depletion_core::sampling::two_type_start;
use depletion_core::{is_admissible, Configuration, ModelParams, TOL_OVERLAP};
use proptest::prelude::*;
use rand::Rng;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    (1..=k)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (k as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=k {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

/// Composite Gauss–Legendre over `[a, b]`, split at every breakpoint inside.
fn composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], panels: usize, rule: &[(f64, f64)]) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let (lo, hi) = (w[0] + p as f64 * h, w[0] + (p + 1) as f64 * h);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            total += rule.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>() * half;
        }
    }
    total
}

fn weight(spec: &PotentialSpec) -> impl Fn(f64) -> f64 + '_ {
    move |r: f64| (-(spec.normalization + hinge(spec.slope * (r - spec.hinge_radius)))).exp()
}

#[test]
fn sphere_confinement_normalizes_in_2d_cartesian() {
    let rule = gauss_legendre(12);
    for (rho0, kappa) in [(5.0, 1.0), (1.5, 3.0), (0.0, 0.7)] {
        let spec = PotentialSpec::sphere_confinement(2, rho0, kappa).unwrap();
        let g = weight(&spec);
        let kinks = [rho0, rho0 + 2.0 / kappa];
        let l = rho0 + 45.0 / kappa;
        let inner = |x: f64| {
            let br: Vec<f64> = kinks
                .iter()
                .filter(|&&k| k > x.abs())
                .flat_map(|&k| {
                    let y = (k * k - x * x).sqrt();
                    [-y, y]
                })
                .collect();
            composite(&|y| g((x * x + y * y).sqrt()), -l, l, &br, 40, &rule)
        };
        let outer_breaks: Vec<f64> = kinks.iter().flat_map(|&k| [-k, k]).chain([0.0]).collect();
        let total = composite(&inner, -l, l, &outer_breaks, 60, &rule);
        assert!((total - 1.0).abs() < 1e-6, "rho0={rho0} kappa={kappa}: {total}");
    }
}

#[test]
fn sphere_confinement_normalizes_in_3d_by_slices() {
    // ∫ dx ∫∫ g(√(x² + y² + z²)) dy dz = ∫ dx 2π ∫_{|x|}^∞ g(r) r dr.
    let rule = gauss_legendre(12);
    for (rho0, kappa) in [(5.0, 1.0), (2.0, 2.0)] {
        let spec = PotentialSpec::sphere_confinement(3, rho0, kappa).unwrap();
        let g = weight(&spec);
        let kinks = [rho0, rho0 + 2.0 / kappa];
        let l = rho0 + 50.0 / kappa;
        let slice = |x: f64| 2.0 * PI * composite(&|r| g(r) * r, x.abs(), l, &kinks, 40, &rule);
        let outer_breaks: Vec<f64> = kinks.iter().flat_map(|&k| [-k, k]).chain([0.0]).collect();
        let total = composite(&slice, -l, l, &outer_breaks, 60, &rule);
        assert!((total - 1.0).abs() < 1e-6, "rho0={rho0} kappa={kappa}: {total}");
    }
}

#[test]
fn gradient_bounds_and_flat_interior() {
    let sphere = PotentialSpec::sphere_confinement(3, 2.0, 0.5).unwrap();
    let particle = PotentialSpec::particle_confinement(3, 2.0).unwrap();
    let mut g = rng(1);
    for _ in 0..2000 {
        let x: Vec<f64> = (0..3).map(|_| g.random_range(-12.0..12.0)).collect();
        let (_, gs) = psi_value_and_grad(&sphere, &x);
        let (_, gp) = psi_value_and_grad(&particle, &x);
        let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(norm(&gs) <= 0.5 + 1e-12);
        assert!(norm(&gp) <= 16.0 + 1e-12);
        if norm(&x) <= 2.0 {
            assert_eq!(psi_value_and_grad(&particle, &x).0, 0.0);
        }
    }
}

fn free_setup(sigma: f64) -> (ModelParams, Potentials) {
    let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_diffusion(sigma, 1.0).unwrap();
    let flat = PotentialSpec::sphere_confinement(2, 1e6, 1.0).unwrap();
    (
        p,
        Potentials {
            sphere: flat,
            particle: None,
        },
    )
}

#[test]
fn free_sphere_increments_are_gaussian() {
    let sigma = 1.7;
    let (p, pots) = free_setup(sigma);
    let settings = DynamicsSettings::new(1e-3).unwrap();
    let cfg = Configuration::spheres_only(2, vec![0.3, -0.4]).unwrap();
    let mut state = IntegratorState::new(cfg, 77);
    let steps = 100_000;
    let mut sums = [0.0f64; 2];
    let mut sq = [0.0f64; 2];
    let mut cross = 0.0;
    for _ in 0..steps {
        let before = state.cfg.spheres().to_vec();
        step_two_type(&mut state, &p, &pots, &settings).unwrap();
        let inc: Vec<f64> = state.cfg.spheres().iter().zip(&before).map(|(a, b)| a - b).collect();
        for k in 0..2 {
            sums[k] += inc[k];
            sq[k] += inc[k] * inc[k];
        }
        cross += inc[0] * inc[1];
    }
    let nf = steps as f64;
    let var = sigma * sigma * settings.dt;
    for k in 0..2 {
        let mean = sums[k] / nf;
        assert!(mean.abs() <= 4.0 * (var / nf).sqrt(), "mean {mean}");
        let v = sq[k] / nf - mean * mean;
        // Var of the sample variance of a Gaussian is 2σ⁴/N.
        assert!((v - var).abs() <= 4.0 * var * (2.0 / nf).sqrt(), "var {v} vs {var}");
    }
    assert!((cross / nf).abs() <= 4.0 * var / nf.sqrt());
    assert!((state.t - nf * settings.dt).abs() < 1e-9);
}

#[test]
fn one_step_moments_have_second_order_error() {
    // With hinge at the origin and |x| < 2/κ, ψ̊ = a + κ²|x|²/4, so the sphere
    // is an Ornstein–Uhlenbeck process with rate θ = c κ²/2.
    let sigma = 1.0;
    let kappa = 0.5;
    let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_diffusion(sigma, 1.0).unwrap();
    let spec = PotentialSpec::sphere_confinement(2, 0.0, kappa).unwrap();
    let pots = Potentials {
        sphere: spec,
        particle: None,
    };
    let theta = 0.5 * sigma * kappa * kappa / 2.0;
    let x0 = [1.2, -0.7];
    let errs = |dt: f64| {
        let settings = DynamicsSettings::new(dt).unwrap();
        let run = |noise: [f64; 2]| {
            let mut st = IntegratorState::new(Configuration::spheres_only(2, x0.to_vec()).unwrap(), 0);
            step_two_type_with_noise(&mut st, &p, &pots, &settings, &noise).unwrap();
            st.cfg.spheres().to_vec()
        };
        let mean = run([0.0, 0.0]);
        let shifted = run([1.0, -2.0]);
        // Output is affine in the noise with slope σ√dt, so the variance is σ²dt.
        assert!((shifted[0] - mean[0] - sigma * dt.sqrt()).abs() < 1e-14);
        assert!((shifted[1] - mean[1] + 2.0 * sigma * dt.sqrt()).abs() < 1e-14);
        let exact_mean = x0[0] * (-theta * dt).exp();
        let exact_var = sigma * sigma * (1.0 - (-2.0 * theta * dt).exp()) / (2.0 * theta);
        ((mean[0] - exact_mean).abs(), (sigma * sigma * dt - exact_var).abs())
    };
    let (m3, v3) = errs(1e-3);
    let (m4, v4) = errs(1e-4);
    // Error per unit time drops by about 10 when dt drops by 10.
    for (a, b) in [(m3, m4), (v3, v4)] {
        let ratio = (a / 1e-3) / (b / 1e-4);
        assert!((ratio - 10.0).abs() < 0.5, "ratio {ratio}");
    }
}

#[test]
fn depletion_deterministic_part_matches_energy_gradient() {
    let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_activity(4.0).unwrap();
    let spec = PotentialSpec::sphere_confinement(2, 0.5, 2.0).unwrap();
    let settings = DynamicsSettings::new(1e-4).unwrap().with_drift(DriftConvention::SigmaSquared);
    let mut g = rng(4);
    for _ in 0..20 {
        let x = random_admissible(4, &p, 2.8, &mut g);
        let drift = depletion_drift(&x, &p, &spec, &settings).unwrap();
        let grad = depletion_core::geometry::energy_gradient(&x, &p).unwrap();
        for (i, xi) in x.chunks_exact(2).enumerate() {
            let (_, gpsi) = psi_value_and_grad(&spec, xi);
            for k in 0..2 {
                let want = -0.5 * gpsi[k] + 0.5 * 4.0 * (-grad[2 * i + k]);
                assert!((drift[2 * i + k] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }
}

fn bath_params() -> (ModelParams, Potentials, f64) {
    let bath_radius = 6.0;
    // About 200 particles outside the three depletion discs.
    let z = 200.0 / (PI * 36.0 - 3.0 * PI * 1.1 * 1.1);
    let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_activity(z).unwrap();
    let pots = Potentials {
        sphere: PotentialSpec::sphere_confinement(2, 2.0, 1.0).unwrap(),
        particle: Some(PotentialSpec::particle_confinement(2, bath_radius).unwrap()),
    };
    (p, pots, bath_radius)
}

#[test]
fn two_type_run_stays_admissible_with_monotone_local_times() {
    let (p, pots, bath_radius) = bath_params();
    let start = two_type_start(3, &p, bath_radius, 5).unwrap();
    assert!((150..=250).contains(&start.n_particles()), "m = {}", start.n_particles());
    let settings = DynamicsSettings::new(DynamicsSettings::default_dt(&p)).unwrap();
    let mut state = IntegratorState::new(start, 9);
    let mut prev = state.local_times.clone();
    let mut corrected_steps = 0;
    for _ in 0..10_000 {
        step_two_type(&mut state, &p, &pots, &settings).unwrap();
        assert!(is_admissible(&state.cfg, &p, TOL_OVERLAP).unwrap());
        let lt = &state.local_times;
        let touched: std::collections::HashSet<BodyPair> =
            state.last_ledger.corrections.iter().map(|c| c.pair).collect();
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (prev.sphere(i, j), lt.sphere(i, j));
                assert!(b >= a);
                assert_eq!(lt.sphere(i, j), lt.sphere(j, i));
                let pair = BodyPair::Spheres(i.min(j), i.max(j));
                assert_eq!(b > a, i != j && touched.contains(&pair));
            }
            for k in 0..lt.n_particles() {
                let (a, b) = (prev.particle(i, k), lt.particle(i, k));
                assert!(b >= a);
                assert_eq!(b > a, touched.contains(&BodyPair::SphereParticle(i, k)));
            }
        }
        if !touched.is_empty() {
            corrected_steps += 1;
        }
        prev = lt.clone();
    }
    assert!(corrected_steps > 100, "bath never touched the spheres");
}

#[test]
fn simulate_emits_schedule_and_is_reproducible() {
    let (p, pots, bath_radius) = bath_params();
    let start = two_type_start(3, &p, bath_radius, 2).unwrap();
    let settings = DynamicsSettings::new(1e-4).unwrap();
    let collect = || {
        let mut out = Vec::new();
        simulate(&start, &p, &pots, &settings, RunMode::TwoType, 250, 100, 31, |r| out.push(r.clone())).unwrap();
        out
    };
    let a = collect();
    let steps: Vec<u64> = a.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![0, 100, 200, 250]);
    let b = collect();
    assert_eq!(a, b);
    for r in &a {
        assert!(is_admissible(&r.cfg, &p, TOL_OVERLAP).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(seed in 0u64..100_000, n in 2usize..8, m in 0usize..30, d in 2usize..=3) {
        let p = ModelParams::new(d, 1.0, 0.2).unwrap().with_diffusion(1.0, 0.6).unwrap();
        let mut g = rng(seed);
        let spheres: Vec<f64> = (0..n * d).map(|_| g.random_range(-2.0..2.0)).collect();
        let particles: Vec<f64> = (0..m * d).map(|_| g.random_range(-3.0..3.0)).collect();
        let mut cfg = Configuration::new(d, spheres, particles).unwrap();
        let mob = Mobility::from_params(&p);
        if resolve_constraints(&mut cfg, &p, mob, 10_000).is_ok() {
            prop_assert!(is_admissible(&cfg, &p, TOL_OVERLAP).unwrap());
            let snapshot = cfg.clone();
            let again = resolve_constraints(&mut cfg, &p, mob, 10_000).unwrap();
            prop_assert!(again.is_empty());
            prop_assert_eq!(cfg, snapshot);
        }
    }
}
