use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Validation failures are data (see
/// [`crate::plmap::ValidationReport`]), not errors; errors are for violated
/// preconditions and malformed input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0} for this operation")]
    UnsupportedDimension(usize),
    #[error("degenerate simplex: {0}")]
    DegenerateSimplex(String),
    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),
    #[error("point not located in any cell")]
    PointNotFound,
    #[error("point outside the cube")]
    OutsideCube,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("map failed validation: {0}")]
    Invalid(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("empty generator list")]
    EmptyGenerators,
    #[error("all generators are the identity")]
    TrivialGenerators,
    #[error("identity input where a nontrivial map is required")]
    IdentityInput,
    #[error("radius {requested} exceeds the configured cap {cap}")]
    RadiusCap { requested: usize, cap: usize },
    #[error("degenerate braid sample: {0}")]
    DegenerateSample(String),
    #[error("strand arity mismatch: word has {word}, spec expects {spec}")]
    ArityMismatch { word: usize, spec: usize },
    #[error("plugin table has no entry for word {0}")]
    PluginMiss(String),
    #[error("not enough data points: {0}")]
    NotEnoughData(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
