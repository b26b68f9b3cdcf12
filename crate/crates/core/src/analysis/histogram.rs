use crate::error::AnalysisError;
use crate::model::Configuration;

/// Counts over strictly increasing bin edges. Values outside
/// `[edges[0], edges[last])` are tallied in `outside` and do not enter
/// `total`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
    outside: u64,
}

impl Histogram {
    pub fn from_edges(edges: Vec<f64>) -> Result<Self, AnalysisError> {
        if edges.len() < 2 {
            return Err(AnalysisError::InvalidEdges("need at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AnalysisError::InvalidEdges("edges must be finite and strictly increasing".into()));
        }
        let nb = edges.len() - 1;
        Ok(Self {
            edges,
            counts: vec![0; nb],
            total: 0,
            outside: 0,
        })
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self, AnalysisError> {
        if bins == 0 {
            return Err(AnalysisError::InvalidEdges("need at least one bin".into()));
        }
        let w = (hi - lo) / bins as f64;
        Self::from_edges((0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * w }).collect())
    }

    pub fn add(&mut self, x: f64) {
        match self.bin_of(x) {
            Some(b) => {
                self.counts[b] += 1;
                self.total += 1;
            }
            None => self.outside += 1,
        }
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let (lo, hi) = (self.edges[0], *self.edges.last().unwrap());
        if !(x >= lo && x < hi) {
            return None;
        }
        // First edge strictly greater than x, minus one.
        Some(self.edges.partition_point(|&e| e <= x) - 1)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn outside(&self) -> u64 {
        self.outside
    }

    /// Merge every `factor` consecutive bins (a short last group is kept).
    pub fn coarsen(&self, factor: usize) -> Result<Self, AnalysisError> {
        if factor == 0 {
            return Err(AnalysisError::InvalidEdges("coarsening factor must be positive".into()));
        }
        let nb = self.counts.len();
        let mut edges = Vec::with_capacity(nb / factor + 2);
        let mut counts = Vec::with_capacity(nb / factor + 1);
        for start in (0..nb).step_by(factor) {
            edges.push(self.edges[start]);
            counts.push(self.counts[start..(start + factor).min(nb)].iter().sum());
        }
        edges.push(self.edges[nb]);
        Ok(Self {
            edges,
            counts,
            total: self.total,
            outside: self.outside,
        })
    }

    /// Normalized cumulative distribution at each right edge.
    pub fn cdf(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        let mut acc = 0u64;
        self.counts
            .iter()
            .map(|c| {
                acc += c;
                acc as f64 / t
            })
            .collect()
    }
}

/// Histogram of `|x_i − x_j|` over a stream of configurations.
pub fn pair_distance_histogram<'a, I>(stream: I, i: usize, j: usize, edges: &[f64]) -> Result<Histogram, AnalysisError>
where
    I: IntoIterator<Item = &'a Configuration>,
{
    let mut h = Histogram::from_edges(edges.to_vec())?;
    let mut seen = false;
    for cfg in stream {
        if i == j || i >= cfg.n_spheres() || j >= cfg.n_spheres() {
            return Err(AnalysisError::InvalidIndices(i, j));
        }
        h.add(cfg.sphere_distance(i, j));
        seen = true;
    }
    if !seen {
        return Err(AnalysisError::EmptyStream);
    }
    Ok(h)
}

/// Default bin edges for pair distances: width `(2r⊙ − 2r̊)/50` from
/// `2r̊(1 − tol_overlap)` up to `upper`. The first edge sits just below
/// contact so pairs left touching by the projection are binned.
pub fn default_pair_edges(params: &crate::model::ModelParams, upper: f64) -> Vec<f64> {
    let lo = params.contact_distance() * (1.0 - crate::model::TOL_OVERLAP);
    let w = (2.0 * params.r_depletion() - lo) / 50.0;
    let w = if w > 0.0 { w } else { lo / 50.0 };
    let bins = ((upper - lo) / w).ceil().max(1.0) as usize;
    (0..=bins).map(|k| lo + k as f64 * w).collect()
}
