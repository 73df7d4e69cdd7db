use thiserror::Error;

/// Errors raised while building scenarios, generating channels, or running solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("conflicting keys `{0}` and `{1}`: give only one")]
    ConflictingKeys(&'static str, &'static str),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("no users: k_r + k_t must be at least 1")]
    NoUsers,
    #[error("sd mask length {got} does not match element count {expected}")]
    MaskLength { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("user index {index} out of range for {count} users")]
    UserIndex { index: usize, count: usize },
    #[error("radar filter vector is zero")]
    ZeroFilter,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Failures of the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("matrix is singular or not positive definite")]
    Singular,
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("starting point is not strictly feasible (max constraint value {0:e})")]
    InfeasibleStart(f64),
    #[error("problem is infeasible (phase-one optimum {0:e})")]
    Infeasible(f64),
    #[error("problem has no bounded constraint")]
    Unbounded,
    #[error("starting phases are not unit modulus")]
    NotUnitModulus,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
