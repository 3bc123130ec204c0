use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown function family `{0}`")]
    UnknownFamily(String),
    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),
    #[error("non-positive scale: {0}")]
    NonPositiveScale(String),
    #[error("parameters do not yield a monotone function: {0}")]
    NonMonotone(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("element {0} is already in the set")]
    ElementInSet(usize),
    #[error("element {0} is not in the ground set")]
    InvalidElement(usize),
    #[error("singleton value of element {0} is zero")]
    ZeroSingleton(usize),
    #[error("ground set of size {n} exceeds the exhaustive limit {limit}")]
    GroundSetTooLarge { n: usize, limit: usize },
    #[error("k = {k} out of range for ground set of size {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("negative marginal {value} for element {element}; oracle is not monotone")]
    NegativeMarginal { element: usize, value: f64 },
    #[error("schedule position {position} at step {step} exceeds the {remaining} remaining elements")]
    IndexBeyondRemaining { step: usize, position: usize, remaining: usize },
    #[error("enumeration node budget {0} exceeded; use sampled mode")]
    NodeBudgetExceeded(u64),
    #[error("pool of size {pool} exceeds machine capacity {capacity}")]
    PoolOverflow { pool: usize, capacity: usize },
    #[error("combined support {support} exceeds cap {cap}")]
    SupportCapExceeded { support: usize, cap: usize },
    #[error("marginal masses differ: {0} vs {1}")]
    InfeasibleMarginals(f64, f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("degenerate denominator D = {d} <= k = {k}")]
    DegenerateD { d: f64, k: usize },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
