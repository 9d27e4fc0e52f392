use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid volatility interval: need 0 <= lo ({lo}) <= hi ({hi}) < inf")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("matrix is not symmetric (off-diagonal entries {upper} vs {lower})")]
    NotSymmetric { upper: f64, lower: f64 },

    #[error("vertex {index} is not positive semidefinite")]
    NotPositiveSemidefinite { index: usize },

    #[error("covariance set has no vertices")]
    EmptyVertexSet,

    #[error("vertex {index} violates diagonal dominance (|off-diagonal| must not exceed either diagonal entry)")]
    NotDiagonallyDominant { index: usize },

    #[error("CFL condition violated: ratio {ratio} exceeds {limit}")]
    CflViolation { ratio: f64, limit: f64 },

    #[error("domain half-width {half_width} is below the truncation requirement {required}")]
    DomainTooNarrow { half_width: f64, required: f64 },

    #[error("non-finite value at time step {step}, node {node}")]
    NonFinite { step: usize, node: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("maximal support is unbounded or malformed: {0}")]
    UnboundedSupport(String),

    #[error("times must be strictly increasing and positive")]
    NonIncreasingTimes,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("step process is not marked adapted")]
    NotAdapted,

    #[error("control selected vertex {index} but only {available} exist")]
    InvalidVertexIndex { index: usize, available: usize },

    #[error("missing derivative: {0}")]
    MissingDerivative(&'static str),

    #[error("function {0} is not analytic")]
    NotAnalytic(String),

    #[error("Cauchy-Riemann residual {residual} exceeds {tolerance} at ({x}, {y})")]
    CauchyRiemann { residual: f64, tolerance: f64, x: f64, y: f64 },

    #[error("({x}, {y}) lies inside the excluded disk of {key}")]
    OutsideDomain { key: String, x: f64, y: f64 },

    #[error("increments overlap: ({0}, {1}] and ({2}, {3}]")]
    OverlappingIncrements(f64, f64, f64, f64),

    #[error("at least one {0} is required")]
    Empty(&'static str),

    #[error("unknown catalog key {0:?}")]
    UnknownKey(String),

    #[error("engine cannot evaluate this random variable: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
