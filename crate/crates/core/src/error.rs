use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weights must be nonnegative (point {point})")]
    NegativeWeight { point: usize },
    #[error("weights sum to {sum}, not 1")]
    WeightNormalization { sum: f64 },
    #[error("utility {value} at point {point} is outside [0, 1]")]
    UtilityOutOfRange { point: usize, value: f64 },
    #[error("point {point} has no coordinate")]
    MissingCoordinate { point: usize },
    #[error("hypothesis class is empty")]
    EmptyClass,
    #[error("labeling entries must be 0 or 1")]
    InvalidLabeling,
    #[error("query has {len} entries but the oracle order is {k}")]
    QueryTooLong { len: usize, k: usize },
    #[error("query references point {point} outside the support of size {n}")]
    PointOutOfRange { point: usize, n: usize },
    #[error("noise rate {eta} violates 0 <= eta < 1/2")]
    InvalidNoise { eta: f64 },
    #[error("invalid oracle order {k}: {reason}")]
    InvalidOrder { k: usize, reason: &'static str },
    #[error("confidence {delta} must lie in (0, 1)")]
    InvalidConfidence { delta: f64 },
    #[error("capacity exceeded: {required} items requested, cap is {cap}")]
    Capacity { required: u128, cap: u128 },
    #[error("point {point} has a zero utility gap; its label is not identifiable")]
    ZeroGap { point: usize },
    #[error("linear constraints are infeasible (empty consistent polytope)")]
    InfeasiblePolytope,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("solver did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("invalid reference policy: {0}")]
    InvalidReference(String),
    #[error("rate undefined: {0}")]
    RateUndefined(&'static str),
}
