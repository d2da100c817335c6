use thiserror::Error;

use crate::problem::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    Validation(ValidationReport),

    #[error("discretization too coarse: eigenvalue {k} moved by {rel_change:.3e} (relative) under refinement")]
    DiscretizationTooCoarse { k: usize, rel_change: f64 },

    #[error("mode {k} is singular (|det| / row-norm product = {ratio:.3e})")]
    SingularMode { k: usize, ratio: f64 },

    #[error("mode {k} is singular and the boundary data is not orthogonal to it (largest coefficient {max_coefficient:.3e})")]
    SingularModeWithData { k: usize, max_coefficient: f64 },

    #[error("no phase table row for 2n = {two_n}, gamma = {gamma}, q = {q}")]
    CaseNotTabulated { two_n: usize, gamma: u32, q: usize },

    #[error("separation check needs an exact rational a/pi")]
    IrrationalInput,

    #[error("amplitude calibration unstable: {reason}")]
    CalibrationUnstable { reason: String },

    #[error("point ({x}, {y}) lies outside the closed rectangle")]
    OutOfDomain { x: f64, y: f64 },

    #[error("derivative orders (dx = {dx}, dy = {dy}) exceed the admissible range")]
    DerivativeOrder { dx: usize, dy: usize },

    #[error("closed-form reduction is only available for n = s = 1")]
    OracleUnavailable,

    #[error("expression error: {0}")]
    Expression(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Config(_) | Error::Expression(_) => 2,
            Error::SingularModeWithData { .. } => 3,
            Error::CaseNotTabulated { .. } => 4,
            _ => 1,
        }
    }

    /// Stable machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::DiscretizationTooCoarse { .. } => "discretization_too_coarse",
            Error::SingularMode { .. } => "singular_mode",
            Error::SingularModeWithData { .. } => "singular_mode_with_data",
            Error::CaseNotTabulated { .. } => "case_not_tabulated",
            Error::IrrationalInput => "irrational_input",
            Error::CalibrationUnstable { .. } => "calibration_unstable",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::DerivativeOrder { .. } => "derivative_order",
            Error::OracleUnavailable => "oracle_unavailable",
            Error::Expression(_) => "expression",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
