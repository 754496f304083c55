use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("unsupported residue: r = {0} is congruent to 1 mod 4")]
    UnsupportedResidue(usize),
    #[error("no known construction: {0}")]
    NoKnownConstruction(String),
    #[error("input is not a Stiefel simplex code: {0}")]
    NotAnSSC(String),
    #[error("wrong field: {0}")]
    WrongField(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("unknown design: {0}")]
    UnknownDesign(String),
    #[error("not a Stiefel point: {0}")]
    NotStiefel(String),
    #[error("design defect: {0}")]
    InvalidDesign(String),
    #[error("no resolution exists")]
    NotFound,
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("numerical failure in restart {restart}: {reason}")]
    NumericalFailure { restart: usize, reason: String },
    #[error("malformed input: {0}")]
    Malformed(String),
}
