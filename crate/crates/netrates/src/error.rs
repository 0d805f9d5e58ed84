//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph collection is empty")]
    EmptyCollection,
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge {0}-{1} is a self-loop")]
    SelfLoop(usize, usize),
    #[error("graphs in a distribution or collection must share a vertex count")]
    MixedVertexCounts,
    #[error("explicit distribution probabilities must be positive and sum to 1 (sum = {0})")]
    InvalidProbabilities(f64),
    #[error("duplicate graph in explicit distribution support")]
    DuplicateSupportGraph,
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("collection member outside the distribution support")]
    MemberOutsideSupport,
    #[error("cut side must be a nonempty proper subset of the vertices")]
    InvalidCut,
    #[error("cut enumeration supports at most {cap} vertices, got {n}")]
    TooManyVertices { n: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("covariance matrix must be symmetric within 1e-12")]
    AsymmetricCovariance,
    #[error("covariance matrix must be positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("covariance matrix must be positive definite")]
    NotPositiveDefinite,
    #[error("component size {comp_size} invalid for network size {n}")]
    InvalidComponentSize { comp_size: usize, n: usize },
    #[error("lift must be nonnegative, got {0}")]
    NegativeLift(f64),
    #[error("grid must have at least 3 finite samples over a nondegenerate interval")]
    DegenerateGrid,
    #[error("target set radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("target set normal must be nonzero")]
    ZeroNormal,

    #[error("invalid simulation config: {0}")]
    InvalidSimulationConfig(String),
    #[error("unknown (node, target) pair: node {node}, target {target}")]
    UnknownTarget { node: usize, target: usize },
    #[error("empirical curve has no usable (nonzero-hit) points")]
    EmptyCurve,
    #[error("lower bound {lower} exceeds upper bound {upper}")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("hypothesis model needs at least 2 hypotheses")]
    TooFewHypotheses,
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("hypothesis index {m} out of range (1..={max})")]
    HypothesisOutOfRange { m: usize, max: usize },

    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
