//! Hit-or-miss estimate of the volume covered by the depletion balls.

use rand::Rng;

use crate::model::ModelParams;
use crate::rng::rng_from_seed;

/// Estimates `Vol(∪_i B(x_i, r⊙))` by uniform sampling over the tight
/// axis-aligned bounding box of the union. Returns `(volume, std_error)`.
pub fn monte_carlo_union_volume(spheres: &[f64], params: &ModelParams, samples: usize, seed: u64) -> (f64, f64) {
    let d = params.d;
    let n = spheres.len() / d;
    if n == 0 || samples == 0 {
        return (0.0, 0.0);
    }
    let r = params.r_depletion();
    let r2 = r * r;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for c in spheres.chunks_exact(d) {
        for k in 0..d {
            lo[k] = lo[k].min(c[k] - r);
            hi[k] = hi[k].max(c[k] + r);
        }
    }
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();

    let mut rng = rng_from_seed(seed);
    let mut point = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..samples {
        for k in 0..d {
            point[k] = rng.random_range(lo[k]..hi[k]);
        }
        let inside = spheres.chunks_exact(d).any(|c| {
            let mut s = 0.0;
            for k in 0..d {
                let t = point[k] - c[k];
                s += t * t;
            }
            s <= r2
        });
        if inside {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
    (box_vol * p, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_list() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        assert_eq!(monte_carlo_union_volume(&[], &p, 10_000, 1), (0.0, 0.0));
    }

    #[test]
    fn single_disc() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let (v, se) = monte_carlo_union_volume(&[0.3, 0.4], &p, 1_000_000, 7);
        assert!((v - PI * 1.21).abs() < 4.0 * se, "{v} ± {se}");
    }

    #[test]
    fn coincident_balls_in_3d() {
        let p = ModelParams::new(3, 1.0, 0.1).unwrap();
        let (v, se) = monte_carlo_union_volume(&[0.0; 6], &p, 200_000, 3);
        assert!((v - 4.0 * PI / 3.0 * 1.331).abs() < 4.0 * se);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = ModelParams::new(2, 1.0, 0.1).unwrap();
        let s = [0.0, 0.0, 2.1, 0.0];
        assert_eq!(
            monte_carlo_union_volume(&s, &p, 10_000, 99),
            monte_carlo_union_volume(&s, &p, 10_000, 99)
        );
    }
}
