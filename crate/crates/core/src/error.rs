use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("invalid norm expression: {0}")]
    InvalidNorm(String),

    #[error("basis vector e{index} has norm {value}; the expression is not a norm on R^n")]
    DegenerateBasis { index: usize, value: f64 },

    #[error("malformed norm spec: {0}")]
    MalformedSpec(String),

    #[error("{constant} is not defined for dimension {dim} (needs at least {min})")]
    UnsupportedDimension {
        constant: &'static str,
        dim: usize,
        min: usize,
    },

    #[error("dimension {dim} exceeds the support-pair enumeration cap of {cap}")]
    SupportCapExceeded { dim: usize, cap: usize },

    #[error(
        "net budget exceeded: {needed} evaluations needed, budget is {budget}; \
         resolution h >= {suggested_h:.4} would fit"
    )]
    BudgetExceeded {
        needed: u64,
        budget: u64,
        suggested_h: f64,
    },

    #[error("invalid resolution h = {0}; need 0 < h <= 1")]
    InvalidResolution(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("input vector is not positive")]
    NegativeInput,

    #[error("vector is not on the positive unit sphere (norm {norm})")]
    NotOnSphere { norm: f64 },

    #[error("defect ||x+y|| - 1 = {epsilon} is >= 1; no useful l_inf^2 embedding")]
    DefectTooLarge { epsilon: f64 },

    #[error("degenerate pair: the disjoint parts x', y' must both be nonzero")]
    DegeneratePair,
}
