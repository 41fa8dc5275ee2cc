use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Every variant maps to a stable machine-readable code via [`KappaError::code`],
/// which the command-line front end prints alongside the human message.
#[derive(Debug, Error)]
pub enum KappaError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("need at least 2 data rows, found {n}")]
    TooFewRows { n: usize },

    #[error("xs has {xs} entries but ys has {ys}")]
    LengthMismatch { xs: usize, ys: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("sample of size {n} is too small (need at least {min})")]
    SampleTooSmall { n: usize, min: usize },

    #[error("marginal self-covariance is not positive ({which})")]
    DegenerateMarginal { which: &'static str },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("family `{0}` has no closed-form joint distribution wired in")]
    UnsupportedFamily(String),

    #[error("theta = {theta} is outside [{lo}, {hi}] for family `{family}`")]
    ThetaOutOfRange {
        family: String,
        theta: f64,
        lo: f64,
        hi: f64,
    },

    #[error("sample size must be positive")]
    NOnPositive,

    #[error("quantile function is not strictly increasing at grid point {index}")]
    NonMonotoneQuantile { index: usize },

    #[error("all values are equal; the marginal has a single support point")]
    AllValuesEqual,

    #[error("support points {index} and {next} coincide")]
    DegenerateGrid { index: usize, next: usize },

    #[error("eigen-spectrum is empty")]
    EmptySpectrum,

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl KappaError {
    /// Stable upper-snake-case identifier for scripting.
    pub fn code(&self) -> &'static str {
        match self {
            KappaError::Io { .. } => "IO_ERROR",
            KappaError::Parse { .. } => "PARSE_ERROR",
            KappaError::TooFewRows { .. } => "TOO_FEW_ROWS",
            KappaError::LengthMismatch { .. } => "LENGTH_MISMATCH",
            KappaError::NonFinite { .. } => "NON_FINITE",
            KappaError::SampleTooSmall { .. } => "SAMPLE_TOO_SMALL",
            KappaError::DegenerateMarginal { .. } => "DEGENERATE_MARGINAL",
            KappaError::Domain(_) => "DOMAIN_ERROR",
            KappaError::UnsupportedFamily(_) => "UNSUPPORTED_FAMILY",
            KappaError::ThetaOutOfRange { .. } => "THETA_OUT_OF_RANGE",
            KappaError::NOnPositive => "N_NON_POSITIVE",
            KappaError::NonMonotoneQuantile { .. } => "NON_MONOTONE_QUANTILE",
            KappaError::AllValuesEqual => "ALL_VALUES_EQUAL",
            KappaError::DegenerateGrid { .. } => "DEGENERATE_GRID",
            KappaError::EmptySpectrum => "EMPTY_SPECTRUM",
            KappaError::UnknownEstimator(_) => "UNKNOWN_ESTIMATOR",
            KappaError::InvalidArgument(_) => "INVALID_ARGUMENT",
        }
    }
}

pub type Result<T> = std::result::Result<T, KappaError>;
