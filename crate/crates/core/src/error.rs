use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("dimension mismatch: configuration has d = {found}, parameters expect d = {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate array of length {len} is not a multiple of d = {d}")]
    RaggedCoordinates { len: usize, d: usize },
    #[error("contact number requires n >= 2, got {0}")]
    TooFewSpheres(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("spheres {0} and {1} have coincident centers")]
    CoincidentCenters(usize, usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("three-body term is only available in d = 2 (got d = {0})")]
    ThreeBodyUnsupported(usize),
    #[error("no tabulated maximal contact number for n = {n} in d = {d}")]
    MissingContactConstant { n: usize, d: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A pair of bodies, used to report projection failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyPair {
    Spheres(usize, usize),
    SphereParticle(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("constraint projection did not converge after {iterations} iterations; violated pairs: {pairs:?}")]
    ProjectionFailed {
        iterations: usize,
        pairs: Vec<BodyPair>,
    },
    #[error("invalid integrator setting `{field}`: {reason}")]
    InvalidSetting { field: &'static str, reason: String },
    #[error("initial configuration is not admissible")]
    InadmissibleInitial,
    #[error("step {step} failed: {source}")]
    AtStep {
        step: u64,
        #[source]
        source: Box<DynamicsError>,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("invalid sampler parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("proposal scale underflowed ({0:e}) after repeated zero-acceptance windows")]
    ProposalUnderflow(f64),
    #[error("initial configuration is not admissible")]
    InadmissibleStart,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("empty stream")]
    EmptyStream,
    #[error("invalid sphere indices ({0}, {1})")]
    InvalidIndices(usize, usize),
    #[error("histogram bin edges differ")]
    BinMismatch,
    #[error("invalid bin edges: {0}")]
    InvalidEdges(String),
    #[error("delta {delta} does not exceed the grid spacing {spacing}")]
    DeltaBelowResolution { delta: f64, spacing: f64 },
    #[error("path is not sampled on a uniform grid")]
    NonUniformGrid,
}
