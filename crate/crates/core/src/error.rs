use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime mismatch: {left} vs {right}")]
    PrimeMismatch { left: u64, right: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("operation needs a nonzero polynomial")]
    ZeroPolynomial,
    #[error("element is not in the coefficient module: {0}")]
    NotInModule(String),
    #[error("no congruence level up to {cap} fixes the vertex")]
    LevelEscalation { cap: u32 },
    #[error("input set is empty")]
    EmptyInput,
    #[error("evaluation at the finite set does not separate the module (rank {rank} < {dim})")]
    StarConditionFails { rank: usize, dim: usize },
    #[error("bit length {bits} exceeds cap {cap}")]
    BitLengthExceeded { bits: u64, cap: u64 },
    #[error("projected coefficient functions degenerate: {0}")]
    DegenerateProjection(String),
    #[error("search exhausted after radius {bound} (hull diameter {diameter})")]
    SearchExhausted { bound: i64, diameter: u64 },
    #[error("enumeration of {size} elements exceeds budget {budget}")]
    EnumerationBudget { size: u128, budget: u128 },
    #[error("determinant is {0}, expected 1")]
    NotSpecialLinear(String),
    #[error("no fixed point in the hull")]
    NoFixedPoint,
    #[error("set is not stable under the compact group")]
    NotStable,
    #[error("invalid representation: {0}")]
    InvalidRep(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Name of the violated precondition, used in diagnostics.
    pub fn precondition(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "prime-modulus",
            Error::PrimeMismatch { .. } => "same-prime",
            Error::DivisionByZero => "nonzero-divisor",
            Error::DimensionMismatch { .. } => "matching-dimensions",
            Error::Singular => "invertible-matrix",
            Error::ZeroPolynomial => "nonzero-polynomial",
            Error::NotInModule(_) => "module-membership",
            Error::LevelEscalation { .. } => "congruence-level-cap",
            Error::EmptyInput => "nonempty-input",
            Error::StarConditionFails { .. } => "omega-separates-coefficients",
            Error::BitLengthExceeded { .. } => "bit-length-cap",
            Error::DegenerateProjection(_) => "nondegenerate-projection",
            Error::SearchExhausted { .. } => "decomposition-search-bound",
            Error::EnumerationBudget { .. } => "enumeration-budget",
            Error::NotSpecialLinear(_) => "determinant-one",
            Error::NoFixedPoint => "fixed-point-exists",
            Error::NotStable => "hull-stable-under-group",
            Error::InvalidRep(_) => "valid-representation",
            Error::Parse(_) => "well-formed-input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
