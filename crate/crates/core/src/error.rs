use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Domain { field: String, reason: String },

    #[error("capacitance matrix is singular: C_M^2 = {cm2:e} F^2")]
    SingularCapacitanceMatrix { cm2: f64 },

    #[error("degenerate oscillator mode: {what} = {value:e}")]
    DegenerateMode { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("operator is not Hermitian (relative defect {defect:e})")]
    NonHermitian { defect: f64 },

    #[error("steady-state system is singular")]
    SingularSteadyState,

    #[error("second-order correlation undefined for mean photon number {n_mean:e}")]
    UndefinedCorrelation { n_mean: f64 },

    #[error("response does not settle; offending roots: {roots:?}")]
    NoSettling { roots: Vec<Complex64> },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain { field: field.into(), reason: reason.into() }
    }

    /// True for errors caused by bad user input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Parse { .. } | Error::UnknownKey { .. } | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
