//! Projection of a configuration back onto the admissible set.
//!
//! Violated pairs are pushed apart along their center axis to exact contact
//! distance, Gauss–Seidel style, until a full sweep finds nothing to fix. The
//! correction is shared between the two bodies in proportion to their
//! mobility, which matches the local-time coefficients of the reflected SDE:
//! a sphere moves by `(x_i − x_j) dL_ij` and a particle by
//! `σ̇² (x_k − x_i) dℓ_ik`.

use std::collections::HashMap;

use crate::error::{BodyPair, DynamicsError};
use crate::model::{Configuration, ModelParams};

pub const DEFAULT_MAX_PROJ_ITERS: usize = 100;

/// A pair counts as violated below `(1 − VIOLATION_SLACK)` times its contact
/// distance; exact contact is reached only up to rounding.
const VIOLATION_SLACK: f64 = 1e-12;

/// Above this many spheres, sphere–particle checks go through a cell grid.
const GRID_THRESHOLD: usize = 16;

/// Relative mobility of spheres and particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobility {
    pub sphere: f64,
    pub particle: f64,
}

impl Mobility {
    /// Weights `1 : σ̇²` taken from the model parameters.
    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            sphere: 1.0,
            particle: params.sigma_particle * params.sigma_particle,
        }
    }
}

/// One pair correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub pair: BodyPair,
    /// Total separation added to the pair.
    pub magnitude: f64,
    /// Matching local-time increment: `magnitude / ((w_a + w_b) · contact)`.
    pub local_time: f64,
}

/// Corrections applied during one projection, in the order they happened.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectionLedger {
    pub corrections: Vec<Correction>,
    pub sweeps: usize,
}

impl ProjectionLedger {
    pub fn is_empty(&self) -> bool {
        self.corrections.is_empty()
    }

    /// Corrections summed per pair.
    pub fn totals(&self) -> HashMap<BodyPair, (f64, f64)> {
        let mut out: HashMap<BodyPair, (f64, f64)> = HashMap::new();
        for c in &self.corrections {
            let e = out.entry(c.pair).or_default();
            e.0 += c.magnitude;
            e.1 += c.local_time;
        }
        out
    }
}

/// Push bodies `a` (weight `wa`) and `b` (weight `wb`) apart to distance
/// `target`. Returns the separation added, or `None` if the pair was fine.
fn separate(a: &mut [f64], b: &mut [f64], wa: f64, wb: f64, target: f64, axis_fallback: usize) -> Option<f64> {
    let d = a.len();
    let mut r2 = 0.0;
    for k in 0..d {
        let t = a[k] - b[k];
        r2 += t * t;
    }
    if r2 >= (target * (1.0 - VIOLATION_SLACK)).powi(2) {
        return None;
    }
    let dist = r2.sqrt();
    let delta = target - dist;
    let (fa, fb) = (wa / (wa + wb), wb / (wa + wb));
    if dist > 0.0 {
        for k in 0..d {
            let e = (a[k] - b[k]) / dist;
            a[k] += fa * delta * e;
            b[k] -= fb * delta * e;
        }
    } else {
        // Coincident centers: any axis will do; pick one deterministically.
        let k = axis_fallback % d;
        a[k] += fa * delta;
        b[k] -= fb * delta;
    }
    Some(delta)
}

fn cell_of(x: &[f64], side: f64) -> Vec<i64> {
    x.iter().map(|c| (c / side).floor() as i64).collect()
}

/// Spheres binned into cells of side `r⊙`; a particle can only conflict with
/// spheres in its own or an adjacent cell.
struct SphereGrid {
    side: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl SphereGrid {
    fn build(spheres: &[f64], d: usize, side: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, c) in spheres.chunks_exact(d).enumerate() {
            cells.entry(cell_of(c, side)).or_default().push(i);
        }
        Self { side, cells }
    }

    fn neighbours(&self, x: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let base = cell_of(x, self.side);
        let d = base.len();
        let mut offset = vec![-1i64; d];
        let mut key = base.clone();
        loop {
            for k in 0..d {
                key[k] = base[k] + offset[k];
            }
            if let Some(v) = self.cells.get(&key) {
                out.extend_from_slice(v);
            }
            let mut k = 0;
            while k < d {
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
            if k == d {
                break;
            }
        }
        out.sort_unstable();
    }
}

/// Project `cfg` onto the admissible set in place.
///
/// Sphere pairs are held at `2 r̊`, sphere–particle pairs at `r⊙`; particles
/// do not interact with each other.
pub fn resolve_constraints(
    cfg: &mut Configuration,
    params: &ModelParams,
    mobility: Mobility,
    max_iters: usize,
) -> Result<ProjectionLedger, DynamicsError> {
    let d = cfg.dim();
    let n = cfg.n_spheres();
    let m = cfg.n_particles();
    let ss = params.contact_distance();
    let sp = params.r_depletion();
    let (ws, wp) = (mobility.sphere, mobility.particle);
    let ss_lt = 1.0 / ((ws + ws) * ss);
    let sp_lt = 1.0 / ((ws + wp) * sp);
    let mut ledger = ProjectionLedger::default();
    let mut near = Vec::new();

    for sweep in 0..max_iters {
        let mut changed = false;
        {
            let spheres = cfg.spheres_mut();
            for i in 0..n {
                for j in (i + 1)..n {
                    let (lo, hi) = spheres.split_at_mut(j * d);
                    let a = &mut lo[i * d..(i + 1) * d];
                    let b = &mut hi[..d];
                    if let Some(delta) = separate(a, b, ws, ws, ss, i + j) {
                        changed = true;
                        ledger.corrections.push(Correction {
                            pair: BodyPair::Spheres(i, j),
                            magnitude: delta,
                            local_time: delta * ss_lt,
                        });
                    }
                }
            }
        }
        if m > 0 && n > 0 {
            let grid = (n > GRID_THRESHOLD).then(|| SphereGrid::build(cfg.spheres(), d, sp));
            let (spheres, particles) = cfg.bodies_mut();
            for k in 0..m {
                let xk = &mut particles[k * d..(k + 1) * d];
                match &grid {
                    Some(g) => g.neighbours(xk, &mut near),
                    None => {
                        near.clear();
                        near.extend(0..n);
                    }
                }
                for &i in &near {
                    let xi = &mut spheres[i * d..(i + 1) * d];
                    if let Some(delta) = separate(xi, xk, ws, wp, sp, i + k) {
                        changed = true;
                        ledger.corrections.push(Correction {
                            pair: BodyPair::SphereParticle(i, k),
                            magnitude: delta,
                            local_time: delta * sp_lt,
                        });
                    }
                }
            }
        }
        ledger.sweeps = sweep + 1;
        if !changed {
            return Ok(ledger);
        }
    }
    let pairs = violated_pairs(cfg, params);
    if pairs.is_empty() {
        Ok(ledger)
    } else {
        Err(DynamicsError::ProjectionFailed {
            iterations: max_iters,
            pairs,
        })
    }
}

/// Pairs still below contact distance (with the projection's slack).
pub fn violated_pairs(cfg: &Configuration, params: &ModelParams) -> Vec<BodyPair> {
    let n = cfg.n_spheres();
    let ss = (params.contact_distance() * (1.0 - VIOLATION_SLACK)).powi(2);
    let sp = (params.r_depletion() * (1.0 - VIOLATION_SLACK)).powi(2);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if crate::model::dist2(cfg.sphere(i), cfg.sphere(j)) < ss {
                out.push(BodyPair::Spheres(i, j));
            }
        }
        for k in 0..cfg.n_particles() {
            if crate::model::dist2(cfg.sphere(i), cfg.particle(k)) < sp {
                out.push(BodyPair::SphereParticle(i, k));
            }
        }
    }
    out
}
