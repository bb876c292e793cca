use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expansion is rational: terminates after {quotients:?}")]
    RationalInput { quotients: Vec<String> },
    #[error("input precision resolves only {safe_depth} partial quotients")]
    PrecisionExhausted { safe_depth: usize },
    #[error("|k| = {k} is not below q_depth = {q_depth}")]
    DepthInsufficient { k: String, q_depth: String },
    #[error("invalid frequency: {0}")]
    InvalidFrequency(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("|Im x| = {im} is outside the strip of width {rho}")]
    StripExceeded { im: f64, rho: f64 },
    #[error("the scaled dual operator needs lambda != 0")]
    LambdaZero,
    #[error("block minus E is numerically singular (condition {condition:e})")]
    SingularBlock { condition: f64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("cosine values of the nodes coincide at indices {0} and {1}")]
    Degenerate(usize, usize),
    #[error("interval selection violated: s = {s}, s*q_n = {sq}, k = {k}")]
    SelectionViolated { s: i64, sq: String, k: i64 },
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("conjugating map is singular at x = {x}")]
    SingularConjugacy { x: String },
    #[error("mode {k} has divisor {divisor:e} below the floor {floor:e}")]
    DivisorBelowFloor { k: i64, divisor: f64, floor: f64 },
    #[error("support of f does not fit into [-N/2, N/2] (N = {n})")]
    SupportTooWide { n: usize },
    #[error("no convergence after depth {depth}: last change {delta:e}")]
    NoConvergence { depth: usize, delta: f64 },
    #[error("Im z = {im} is not positive")]
    BoundaryInput { im: f64 },
    #[error("E = {energy} lies within {distance:e} of a truncation eigenvalue")]
    AtomCollision { energy: f64, distance: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Numeric failures, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::SingularBlock { .. }
                | Error::SingularConjugacy { .. }
                | Error::DivisorBelowFloor { .. }
                | Error::AtomCollision { .. }
                | Error::PrecisionExhausted { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
