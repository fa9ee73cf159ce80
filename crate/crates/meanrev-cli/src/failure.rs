//! Process-level error categories and exit codes.

use std::fmt;

use meanrev::calibrate::CalibrateError;
use meanrev::empirics::EmpiricsError;
use meanrev::io::IoError;
use meanrev::model::ModelError;
use meanrev::sim::SimError;

/// A command failure, bucketed by who must act on it: the caller fixing
/// the invocation (usage, exit 2), the data being repaired (data, exit 3),
/// or the computation being genuinely unable to deliver (numerical,
/// exit 4).
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config keys, or out-of-domain settings.
    Usage(String),
    /// Unreadable or malformed input files.
    Data(String),
    /// The requested quantity is not computable from this input.
    Numerical(String),
}

impl Failure {
    /// Process exit code for this category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage: {msg}"),
            Failure::Data(msg) => write!(f, "data: {msg}"),
            Failure::Numerical(msg) => write!(f, "numerical: {msg}"),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter { .. } => Failure::Usage(e.to_string()),
            ModelError::HorizonTooSmall { .. } | ModelError::NoCrossing { .. } => {
                Failure::Numerical(e.to_string())
            }
        }
    }
}

impl From<EmpiricsError> for Failure {
    fn from(e: EmpiricsError) -> Self {
        match e {
            EmpiricsError::InvalidConfig { .. } | EmpiricsError::EmptyGrid => {
                Failure::Usage(e.to_string())
            }
            EmpiricsError::InsufficientData { .. }
            | EmpiricsError::DegenerateDesign { .. }
            | EmpiricsError::InsufficientHistory { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig { .. } | SimError::FrequencyMismatch { .. } => {
                Failure::Usage(e.to_string())
            }
            SimError::NonFinite { .. } => Failure::Numerical(e.to_string()),
            SimError::Model(inner) => inner.into(),
            SimError::Series(inner) => inner.into(),
        }
    }
}

impl From<CalibrateError> for Failure {
    fn from(e: CalibrateError) -> Self {
        match e {
            CalibrateError::InsufficientCurve { .. } | CalibrateError::NotConverged => {
                Failure::Numerical(e.to_string())
            }
            CalibrateError::Model(inner) => inner.into(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Data(e.to_string())
    }
}
