use thiserror::Error;

/// Errors raised by geometric and numerical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("the origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("the center is not an interior point of the body")]
    CenterNotInterior,
    #[error("intersection has empty interior")]
    EmptyInterior,
    #[error("section is empty or lower-dimensional")]
    EmptySection,
    #[error("radial integral needs a positive decay rate, got {0}")]
    NoDecayBound(f64),
    #[error("radial integral does not decay along the requested ray")]
    RadialDivergence,
    #[error("no Monte Carlo sample landed in the region")]
    ZeroAcceptance,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation `{0}` is not available for ball bodies")]
    BallUnsupported(&'static str),
    #[error("volume routes disagree: {first} vs {second} (budget {budget})")]
    RouteDisagreement { first: f64, second: f64, budget: f64 },
    #[error("identity violated: {lhs} vs {rhs} (budget {budget})")]
    IdentityViolation { lhs: f64, rhs: f64, budget: f64 },
    #[error("barycenter {0:e} away from the origin")]
    BarycenterNotOrigin(f64),
    #[error("barycenters are not opposite (mismatch {0:e})")]
    BarycentersNotOpposite(f64),
    #[error("invalid speed function: {0}")]
    InvalidSpeed(String),
    #[error("shadow body is not convex at t = {0}")]
    NotConvexAtT(f64),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for malformed input (as opposed to a violated precondition).
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
