//! Model parameters, configurations, admissibility and contact numbers.

use crate::error::ModelError;

/// Default relative tolerance when checking admissibility. The projection
/// integrator resolves constraints only to floating-point accuracy.
pub const TOL_OVERLAP: f64 = 1e-9;

/// Relative contact tolerance for analytically constructed configurations.
pub const EPS_CONTACT_ANALYTIC: f64 = 1e-6;

/// Relative contact tolerance for configurations produced by annealing.
pub const EPS_CONTACT_ANNEAL: f64 = 1e-2;

/// Physical parameters of the two-size model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Spatial dimension.
    pub d: usize,
    /// Hard-sphere radius.
    pub r_sphere: f64,
    /// Particle (depletant) radius, `0 <= r_particle < r_sphere`.
    pub r_particle: f64,
    /// Activity of the particle bath.
    pub z_dot: f64,
    /// Diffusion coefficient of the hard spheres.
    pub sigma_sphere: f64,
    /// Diffusion coefficient of the particles.
    pub sigma_particle: f64,
}

impl ModelParams {
    /// Parameters with zero activity and unit diffusion coefficients.
    pub fn new(d: usize, r_sphere: f64, r_particle: f64) -> Result<Self, ModelError> {
        let p = Self {
            d,
            r_sphere,
            r_particle,
            z_dot: 0.0,
            sigma_sphere: 1.0,
            sigma_particle: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_activity(mut self, z_dot: f64) -> Result<Self, ModelError> {
        self.z_dot = z_dot;
        self.validate()?;
        Ok(self)
    }

    pub fn with_diffusion(mut self, sigma_sphere: f64, sigma_particle: f64) -> Result<Self, ModelError> {
        self.sigma_sphere = sigma_sphere;
        self.sigma_particle = sigma_particle;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field, reason: &str| {
            Err(ModelError::InvalidParameter {
                field,
                reason: reason.to_string(),
            })
        };
        if self.d < 1 {
            return bad("d", "dimension must be at least 1");
        }
        if !(self.r_sphere.is_finite() && self.r_sphere > 0.0) {
            return bad("r_sphere", "hard-sphere radius must be positive");
        }
        if !(self.r_particle.is_finite() && self.r_particle >= 0.0) {
            return bad("r_particle", "particle radius must be non-negative");
        }
        if self.r_particle >= self.r_sphere {
            return bad(
                "r_particle",
                "size ratio rho = r_particle / r_sphere must lie in [0, 1)",
            );
        }
        if !(self.z_dot.is_finite() && self.z_dot >= 0.0) {
            return bad("z_dot", "activity must be non-negative");
        }
        if !(self.sigma_sphere.is_finite() && self.sigma_sphere >= 0.0) {
            return bad("sigma_sphere", "diffusion coefficient must be non-negative");
        }
        if !(self.sigma_particle.is_finite() && self.sigma_particle >= 0.0) {
            return bad("sigma_particle", "diffusion coefficient must be non-negative");
        }
        Ok(())
    }

    /// Size ratio ρ = ṙ / r̊.
    pub fn rho(&self) -> f64 {
        self.r_particle / self.r_sphere
    }

    /// Radius of the depletion ball, r̊ + ṙ.
    pub fn r_depletion(&self) -> f64 {
        self.r_sphere + self.r_particle
    }

    /// Hard-core contact distance between two sphere centers.
    pub fn contact_distance(&self) -> f64 {
        2.0 * self.r_sphere
    }

    /// Same model with every length multiplied by `c` and the activity by
    /// `c^{-d}`, which leaves `z_dot * E` invariant.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            r_sphere: self.r_sphere * c,
            r_particle: self.r_particle * c,
            z_dot: self.z_dot * c.powi(-(self.d as i32)),
            ..*self
        }
    }
}

/// Squared Euclidean distance between two points.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Centers of `n` hard spheres and `m` particles, stored point by point with
/// stride `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    d: usize,
    spheres: Vec<f64>,
    particles: Vec<f64>,
}

impl Configuration {
    pub fn new(d: usize, spheres: Vec<f64>, particles: Vec<f64>) -> Result<Self, ModelError> {
        if d == 0 {
            return Err(ModelError::InvalidParameter {
                field: "d",
                reason: "dimension must be at least 1".into(),
            });
        }
        for arr in [&spheres, &particles] {
            if arr.len() % d != 0 {
                return Err(ModelError::RaggedCoordinates { len: arr.len(), d });
            }
        }
        Ok(Self { d, spheres, particles })
    }

    /// Configuration with spheres only.
    pub fn spheres_only(d: usize, spheres: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(d, spheres, Vec::new())
    }

    /// Build from nested point lists.
    pub fn from_points(d: usize, spheres: &[Vec<f64>], particles: &[Vec<f64>]) -> Result<Self, ModelError> {
        let flatten = |pts: &[Vec<f64>]| -> Result<Vec<f64>, ModelError> {
            let mut out = Vec::with_capacity(pts.len() * d);
            for p in pts {
                if p.len() != d {
                    return Err(ModelError::DimensionMismatch {
                        expected: d,
                        found: p.len(),
                    });
                }
                out.extend_from_slice(p);
            }
            Ok(out)
        };
        Self::new(d, flatten(spheres)?, flatten(particles)?)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_spheres(&self) -> usize {
        self.spheres.len() / self.d
    }

    pub fn n_particles(&self) -> usize {
        self.particles.len() / self.d
    }

    pub fn sphere(&self, i: usize) -> &[f64] {
        &self.spheres[i * self.d..(i + 1) * self.d]
    }

    pub fn particle(&self, k: usize) -> &[f64] {
        &self.particles[k * self.d..(k + 1) * self.d]
    }

    /// Flat sphere coordinates.
    pub fn spheres(&self) -> &[f64] {
        &self.spheres
    }

    /// Flat particle coordinates.
    pub fn particles(&self) -> &[f64] {
        &self.particles
    }

    pub fn spheres_mut(&mut self) -> &mut [f64] {
        &mut self.spheres
    }

    pub fn particles_mut(&mut self) -> &mut [f64] {
        &mut self.particles
    }

    /// Sphere and particle coordinates, mutably and at once.
    pub fn bodies_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.spheres, &mut self.particles)
    }

    pub fn set_particles(&mut self, particles: Vec<f64>) -> Result<(), ModelError> {
        if particles.len() % self.d != 0 {
            return Err(ModelError::RaggedCoordinates {
                len: particles.len(),
                d: self.d,
            });
        }
        self.particles = particles;
        Ok(())
    }

    pub fn into_parts(self) -> (usize, Vec<f64>, Vec<f64>) {
        (self.d, self.spheres, self.particles)
    }

    /// Copy with the particles dropped.
    pub fn without_particles(&self) -> Self {
        Self {
            d: self.d,
            spheres: self.spheres.clone(),
            particles: Vec::new(),
        }
    }

    pub fn sphere_distance(&self, i: usize, j: usize) -> f64 {
        dist2(self.sphere(i), self.sphere(j)).sqrt()
    }
}

fn check_dim(cfg_d: usize, params: &ModelParams) -> Result<(), ModelError> {
    if cfg_d != params.d {
        return Err(ModelError::DimensionMismatch {
            expected: params.d,
            found: cfg_d,
        });
    }
    Ok(())
}

/// Whether every sphere–sphere distance is at least `2 r̊ (1 - tol)` and every
/// sphere–particle distance at least `r⊙ (1 - tol)`.
pub fn is_admissible(cfg: &Configuration, params: &ModelParams, tol: f64) -> Result<bool, ModelError> {
    check_dim(cfg.dim(), params)?;
    let ss = (params.contact_distance() * (1.0 - tol)).powi(2);
    let sp = (params.r_depletion() * (1.0 - tol)).powi(2);
    let n = cfg.n_spheres();
    for i in 0..n {
        let xi = cfg.sphere(i);
        for j in (i + 1)..n {
            if dist2(xi, cfg.sphere(j)) < ss {
                return Ok(false);
            }
        }
        for k in 0..cfg.n_particles() {
            if dist2(xi, cfg.particle(k)) < sp {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Number of sphere pairs within `2 r̊ (1 + eps_c)` of each other.
///
/// `spheres` is a flat coordinate array with stride `params.d`.
pub fn contact_number(spheres: &[f64], params: &ModelParams, eps_c: f64) -> usize {
    ContactGraph::from_spheres(spheres, params, eps_c).edge_count()
}

/// Sphere pairs at contact distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    tolerance: f64,
}

impl ContactGraph {
    pub fn from_spheres(spheres: &[f64], params: &ModelParams, eps_c: f64) -> Self {
        let d = params.d;
        let n = spheres.len() / d;
        let cut2 = (params.contact_distance() * (1.0 + eps_c)).powi(2);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if dist2(&spheres[i * d..(i + 1) * d], &spheres[j * d..(j + 1) * d]) <= cut2 {
                    edges.push((i, j));
                }
            }
        }
        Self {
            n,
            edges,
            tolerance: eps_c,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }
}

/// Maximal planar contact number `⌊3n − √(12n − 3)⌋` (Harborth).
pub fn max_contact_number_2d(n: usize) -> Result<usize, ModelError> {
    if n < 2 {
        return Err(ModelError::TooFewSpheres(n));
    }
    // floor(3n - sqrt(m)) = 3n - ceil(sqrt(m)), evaluated in integers.
    let m = 12 * n as u64 - 3;
    let s = m.isqrt();
    let ceil = if s * s == m { s } else { s + 1 };
    Ok((3 * n as u64 - ceil) as usize)
}

/// Tabulated maximal contact number in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnownContacts {
    pub value: usize,
    /// `false` when only a best-known lower bound is available.
    pub exact: bool,
}

/// Exact values for n = 2..=5 and best-known lower bounds for n = 6..=9.
pub fn known_contact_values_3d(n: usize) -> Option<KnownContacts> {
    let (value, exact) = match n {
        2 => (1, true),
        3 => (3, true),
        4 => (6, true),
        5 => (9, true),
        6 => (12, false),
        7 => (15, false),
        8 => (18, false),
        9 => (21, false),
        _ => return None,
    };
    Some(KnownContacts { value, exact })
}

/// Maximal (or best-known) contact number for `n` spheres in dimension `d`.
pub fn max_contact_number(n: usize, d: usize) -> Option<KnownContacts> {
    match (n, d) {
        (0 | 1, _) => Some(KnownContacts { value: 0, exact: true }),
        (_, 2) => max_contact_number_2d(n)
            .ok()
            .map(|value| KnownContacts { value, exact: true }),
        (_, 3) => known_contact_values_3d(n),
        _ => None,
    }
}
