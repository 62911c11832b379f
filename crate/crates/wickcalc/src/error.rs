use thiserror::Error;

/// Failure conditions raised across the workbench.
///
/// Every variant corresponds to a stable upper-case code returned by [`Error::code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("factorization D*E does not reproduce rho-g: {0}")]
    InconsistentFactorization(String),
    #[error("polar time is not an integer multiple of hbar: {0}")]
    NonQuantizedLevel(String),
    #[error("no admissible vacuum for the requested level: {0}")]
    NoSolution(String),
    #[error("recurrence divides by zero at index {0}")]
    DivisionByZeroRecurrence(usize),
    #[error("non-positive weight at index {0}")]
    NegativeWeight(usize),
    #[error("no positive density solution is registered for {0}")]
    NoPositiveSolution(String),
    #[error("theta series diverges for nome {0}")]
    Divergent(f64),
    #[error("quadrature did not converge: {0}")]
    QuadratureFail(String),
    #[error("relation residual {residual:e} exceeds tolerance at interior index {index}")]
    TruncationUnsound { residual: f64, index: usize },
    #[error("operator is not scalar: spread {0:e}")]
    NotScalar(f64),
    #[error("symbol grid is too coarse for the space: {0}")]
    IllConditioned(String),
    #[error("operator and quadrature routes disagree by {0:e}")]
    QuadratureResolution(f64),
    #[error("log-log regression is unstable: residual {0:e}")]
    FitUnstable(f64),
    #[error("Weyl symmetrization degree {0} exceeds the limit 6")]
    DegreeLimit(usize),
    #[error("characteristic left the bounded region at t={0}")]
    OdeDiverged(f64),
    #[error("|eta| = {0} is past the first sheet; enable the second-sheet flag")]
    Branch(f64),
    #[error("Casimir restriction varies by {0:e} over the chart")]
    NotConstant(f64),
    #[error("hbar = {0} is below the double-precision floor 0.45")]
    PrecisionFloor(f64),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InconsistentFactorization(_) => "INCONSISTENT_FACTORIZATION",
            Error::NonQuantizedLevel(_) => "NON_QUANTIZED_LEVEL",
            Error::NoSolution(_) => "NO_SOLUTION",
            Error::DivisionByZeroRecurrence(_) => "DIVISION_BY_ZERO_RECURRENCE",
            Error::NegativeWeight(_) => "NEGATIVE_WEIGHT",
            Error::NoPositiveSolution(_) => "NO_POSITIVE_SOLUTION",
            Error::Divergent(_) => "DIVERGENT",
            Error::QuadratureFail(_) => "QUADRATURE_FAIL",
            Error::TruncationUnsound { .. } => "TRUNCATION_UNSOUND",
            Error::NotScalar(_) => "NOT_SCALAR",
            Error::IllConditioned(_) => "ILL_CONDITIONED",
            Error::QuadratureResolution(_) => "QUADRATURE_RESOLUTION",
            Error::FitUnstable(_) => "FIT_UNSTABLE",
            Error::DegreeLimit(_) => "DEGREE_LIMIT",
            Error::OdeDiverged(_) => "ODE_DIVERGED",
            Error::Branch(_) => "BRANCH",
            Error::NotConstant(_) => "NOT_CONSTANT",
            Error::PrecisionFloor(_) => "PRECISION_FLOOR",
            Error::Domain(_) => "DOMAIN",
            Error::ConfigInvalid(_) => "CONFIG_INVALID",
            Error::UnknownModel(_) => "UNKNOWN_MODEL",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
