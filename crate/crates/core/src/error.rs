use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed tableau document: {0}")]
    Parse(String),

    #[error("shape mismatch in {field}: {detail}")]
    Shape { field: String, detail: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("{family}: constraint violated: {constraint}")]
    ConstraintViolation { family: String, constraint: String },

    #[error("{family}: missing parameter {name}")]
    MissingParameter { family: String, name: String },

    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),

    #[error("unknown family {0:?}")]
    UnknownFamily(String),

    #[error("invalid problem spec {spec:?}: {reason}")]
    InvalidProblem { spec: String, reason: String },

    #[error("noise dimension m = {m} too large for exact enumeration (max {max})")]
    NoiseDimensionTooLarge { m: usize, max: usize },

    #[error("trajectory diverged at t = {t}: state {state:?}")]
    Diverged { t: f64, state: Vec<f64> },

    #[error("{count} of {total} trajectories diverged")]
    DivergedTrajectories { count: usize, total: usize },

    #[error("problem {0:?} has no exact functional")]
    MissingExactFunctional(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("order regression undefined: {0}")]
    Regression(String),
}

impl Error {
    pub(crate) fn constraint(family: impl ToString, constraint: impl ToString) -> Self {
        Error::ConstraintViolation {
            family: family.to_string(),
            constraint: constraint.to_string(),
        }
    }

    pub(crate) fn invalid(msg: impl ToString) -> Self {
        Error::InvalidArgument(msg.to_string())
    }
}
