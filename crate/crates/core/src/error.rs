use thiserror::Error;

/// Errors raised while building or evaluating allocation problems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("problem has no strata")]
    Empty,
    #[error("length mismatch: expected {expected} values for {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("duplicate stratum label `{0}`")]
    DuplicateLabel(String),
    #[error("stratum `{label}`: {reason}")]
    InvalidStratum { label: String, reason: String },
    #[error("infeasible problem: {0}")]
    InfeasibleProblem(String),
    #[error("take-min and take-max sets overlap at stratum index {0}")]
    OverlappingSets(usize),
    #[error("stratum index {0} is out of range")]
    UnknownStratum(usize),
    #[error("take-min and take-max sets cover every stratum, s is undefined")]
    PartitionCoversAll,
    #[error("allocation for stratum index {0} is not positive")]
    NonPositiveAllocation(usize),
    #[error("stratum `{0}` has zero standard deviation")]
    ZeroVariance(String),
    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("bisection bracket does not enclose a root: g(lo) = {lo}, g(hi) = {hi}")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("malformed allocation: {0}")]
    MalformedAllocation(String),
    #[error("enumeration oracle supports at most {max} strata, got {got}")]
    TooManyStrata { max: usize, got: usize },
    #[error("allocation sums to {sum}, expected {expected}")]
    SumMismatch { sum: f64, expected: u64 },
    #[error("degenerate value range: min = max = {0}")]
    DegenerateRange(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, AllocError>;
