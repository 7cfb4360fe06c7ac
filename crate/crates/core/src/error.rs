use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0:?} is reducible over the prime field")]
    Reducible(Vec<u32>),
    #[error("no built-in modulus for q = {0}; pass one explicitly")]
    NoDefaultModulus(u64),
    #[error("invalid modulus: {0}")]
    BadModulus(String),
    #[error("field of order {0} is too large")]
    FieldTooLarge(u64),
    #[error("element code {code} out of range for a field of order {q}")]
    ElementOutOfRange { code: u64, q: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index {index} out of range for a space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("missing second operand")]
    MissingOperand,
    #[error("every coefficient is zero")]
    AllZero,
    #[error("equation has the wrong right-hand-side mode for this operation")]
    WrongRhsMode,
    #[error("right-hand side does not match the equation's rhs mode")]
    RhsMismatch,
    #[error("work estimate {needed} exceeds the enumeration budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("function leaves [0, 1] at index {index} (value {value})")]
    NotRealRange { index: usize, value: String },
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
    #[error("construction not applicable: {0}")]
    NotApplicable(String),
    #[error("no violating sample within {0} tries")]
    ExhaustedTries(u64),
    #[error("no admissible c found after {0} halvings")]
    CSearchFailed(u32),
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: i64 },
    #[error("equation has {k} variables but a cube of dimension {t} needs {needed}")]
    ArityMismatch { k: usize, t: u32, needed: usize },
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
