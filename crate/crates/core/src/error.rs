use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DancoError>;

/// Errors raised by the estimation pipeline.
///
/// Variants are grouped by the exit-code family the CLI maps them to:
/// parameter errors, input/data errors, numeric errors and calibration errors.
#[derive(Debug, Error)]
pub enum DancoError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("degenerate geometry at point {index}: {detail}")]
    DegenerateGeometry { index: usize, detail: String },

    #[error("numeric instability: {0}")]
    NumericInstability(String),

    #[error("{path}: line {line}, column {column}: non-numeric value `{value}`")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: line {line}: ragged row with {found} columns, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: no data rows")]
    EmptyInput { path: PathBuf },

    #[error("calibration mismatch: {0}")]
    CalibrationMismatch(String),

    #[error("calibration file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt calibration file: {0}")]
    CorruptCalibration(String),

    #[error("calibration invariant violated: {0}")]
    CalibrationInvariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DancoError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        DancoError::Parameter(msg.into())
    }

    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        DancoError::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DancoError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            DancoError::Parameter(_) | DancoError::Domain { .. } => 2,
            DancoError::Data(_)
            | DancoError::DegenerateGeometry { .. }
            | DancoError::NonNumeric { .. }
            | DancoError::RaggedRow { .. }
            | DancoError::EmptyInput { .. } => 3,
            DancoError::NumericInstability(_) => 4,
            DancoError::CalibrationMismatch(_)
            | DancoError::VersionMismatch { .. }
            | DancoError::CorruptCalibration(_)
            | DancoError::CalibrationInvariant(_) => 5,
            DancoError::Io { .. } => 6,
        }
    }

    /// Short machine-parsable category tag.
    pub fn kind(&self) -> &'static str {
        match self {
            DancoError::Parameter(_) | DancoError::Domain { .. } => "parameter",
            DancoError::Data(_)
            | DancoError::DegenerateGeometry { .. }
            | DancoError::NonNumeric { .. }
            | DancoError::RaggedRow { .. }
            | DancoError::EmptyInput { .. } => "input",
            DancoError::NumericInstability(_) => "numeric",
            DancoError::CalibrationMismatch(_)
            | DancoError::VersionMismatch { .. }
            | DancoError::CorruptCalibration(_)
            | DancoError::CalibrationInvariant(_) => "calibration",
            DancoError::Io { .. } => "io",
        }
    }
}
