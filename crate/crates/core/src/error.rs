use thiserror::Error;

use crate::exprlang::SyntaxError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),

    #[error("quaternion of norm {0:e} is too close to zero to invert")]
    NearZeroQuaternion(f64),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("metric is singular or not positive definite: {0}")]
    SingularMetric(String),

    #[error("spanning fields are linearly dependent")]
    DegenerateSpan,

    #[error("map is not submersive at the sample point")]
    NotSubmersive,

    #[error("map is not horizontally conformal (residual {0:e})")]
    NotHorizontallyConformal(f64),

    #[error("J^2 + Id has norm {0:e}; not an almost complex structure")]
    NotAlmostComplex(f64),

    #[error("incidence point is at infinity (|z1 + z2 j| = {0:e})")]
    IncidenceAtInfinity(f64),

    #[error("Jacobian is singular (condition ratio {0:e})")]
    SingularJacobian(f64),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("point lies outside the declared domain: {0}")]
    OutOfDomain(String),

    #[error("surface violates the contact condition (residual {0:e})")]
    ContactViolation(f64),

    #[error("t^2 S - 6 vanishes at the sample point (t = {0})")]
    IntervalViolation(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short stable name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax(_) => "SyntaxError",
            Error::NearZeroQuaternion(_) => "NearZeroQuaternion",
            Error::UnboundVariable(_) => "UnboundVariable",
            Error::Domain(_) => "DomainError",
            Error::Dimension { .. } => "DimensionError",
            Error::Evaluation(_) => "EvaluationError",
            Error::SingularMetric(_) => "SingularMetric",
            Error::DegenerateSpan => "DegenerateSpan",
            Error::NotSubmersive => "NotSubmersive",
            Error::NotHorizontallyConformal(_) => "NotHorizontallyConformal",
            Error::NotAlmostComplex(_) => "NotAlmostComplex",
            Error::IncidenceAtInfinity(_) => "IncidenceAtInfinity",
            Error::SingularJacobian(_) => "SingularJacobian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::ContactViolation(_) => "ContactViolation",
            Error::IntervalViolation(_) => "IntervalViolation",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
