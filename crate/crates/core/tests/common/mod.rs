#![allow(dead_code)]

use depletion_core::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random admissible sphere centers in a box of half-width `half`, by
/// sequential rejection.
pub fn random_admissible(n: usize, params: &ModelParams, half: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = params.d;
    let c2 = params.contact_distance().powi(2);
    let mut out: Vec<f64> = Vec::with_capacity(n * d);
    while out.len() < n * d {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-half..half)).collect();
        let ok = out.chunks_exact(d).all(|y| {
            let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            s >= c2
        });
        if ok {
            out.extend(x);
        }
    }
    out
}

/// Random rotation (QR of a Gaussian matrix by Gram–Schmidt), row-major.
pub fn random_rotation(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut q = vec![0.0; d * d];
    for i in 0..d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        for j in 0..i {
            let dot: f64 = (0..d).map(|k| v[k] * q[j * d + k]).sum();
            for k in 0..d {
                v[k] -= dot * q[j * d + k];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for k in 0..d {
            q[i * d + k] = v[k] / norm;
        }
    }
    q
}

pub fn rigid_motion(points: &[f64], d: usize, rot: &[f64], shift: &[f64]) -> Vec<f64> {
    points
        .chunks_exact(d)
        .flat_map(|x| (0..d).map(move |i| (0..d).map(|k| rot[i * d + k] * x[k]).sum::<f64>() + shift[i]))
        .collect()
}
