use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("empty cluster: no open edge in the sample")]
    EmptyCluster,
    #[error("ill-posed problem: {0}")]
    IllPosed(String),
    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("compatibility error: {0}")]
    Compatibility(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("numeric kind mismatch: {0}")]
    Kind(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Parameter(msg.into()))
}
