use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use depletion_core::dynamics::{
    resolve_constraints, step_depletion, step_two_type, DynamicsSettings, IntegratorState, Mobility, PotentialSpec,
    Potentials,
};
use depletion_core::geometry::{energy_gradient, energy_pairwise, overlap_closed_2d, overlap_quadrature};
use depletion_core::sampling::{grid_start, two_type_start, HardSphereChain};
use depletion_core::{Configuration, ModelParams};

fn overlap(c: &mut Criterion) {
    let mut g = c.benchmark_group("overlap");
    g.bench_function("closed_2d", |b| b.iter(|| overlap_closed_2d(black_box(0.93), 1.1)));
    g.bench_function("quadrature_3d", |b| b.iter(|| overlap_quadrature(black_box(0.93), 3, 1.1)));
    g.bench_function("quadrature_5d", |b| b.iter(|| overlap_quadrature(black_box(0.93), 5, 1.1)));
    g.finish();
}

fn energy(c: &mut Criterion) {
    let mut g = c.benchmark_group("energy");
    for n in [6usize, 30] {
        let p = ModelParams::new(3, 1.0, 0.1).unwrap();
        let x = grid_start(n, &p);
        g.bench_function(format!("pairwise_n{n}"), |b| b.iter(|| energy_pairwise(black_box(&x), &p)));
        g.bench_function(format!("gradient_n{n}"), |b| b.iter(|| energy_gradient(black_box(&x), &p).unwrap()));
    }
    g.finish();
}

fn steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    let p = ModelParams::new(2, 1.0, 0.1).unwrap().with_activity(5.0).unwrap();
    let psi = PotentialSpec::sphere_confinement(2, 2.0, 1.0).unwrap();
    let settings = DynamicsSettings::new(1e-4).unwrap();

    let spheres = Configuration::spheres_only(2, grid_start(4, &p)).unwrap();
    let mut st = IntegratorState::new(spheres, 1);
    g.bench_function("depletion_n4", |b| b.iter(|| step_depletion(&mut st, &p, &psi, &settings).unwrap()));

    let pots = Potentials {
        sphere: psi,
        particle: Some(PotentialSpec::particle_confinement(2, 6.0).unwrap()),
    };
    let start = two_type_start(3, &p, 6.0, 2).unwrap();
    let mut st = IntegratorState::new(start.clone(), 2);
    g.bench_function(format!("two_type_n3_m{}", start.n_particles()), |b| {
        b.iter(|| step_two_type(&mut st, &p, &pots, &settings).unwrap())
    });

    let squeezed: Vec<f64> = grid_start(9, &p).iter().map(|x| 0.9 * x).collect();
    let cfg = Configuration::spheres_only(2, squeezed).unwrap();
    g.bench_function("projection_n9", |b| {
        b.iter_batched(
            || cfg.clone(),
            |mut c| resolve_constraints(&mut c, &p, Mobility::from_params(&p), 100).unwrap(),
            BatchSize::SmallInput,
        )
    });

    let mut chain = HardSphereChain::new(grid_start(6, &p), p, psi, 5.0, 0.3, 3).unwrap();
    g.bench_function("metropolis_sweep_n6", |b| b.iter(|| chain.sweep(None)));
    g.finish();
}

criterion_group!(benches, overlap, energy, steps);
criterion_main!(benches);
