use thiserror::Error;

use crate::solver::qp::QpError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no potential_W on this game; construct one (e.g. ridehail::build_potential) or supply it in the instance")]
    MissingPotential,
    #[error("variable {0} appears in an indefinite term but has no finite box; add bounds")]
    UnboundedBilinear(usize),
    #[error("enumeration refused: {0} binaries exceed the limit of {1}")]
    TooManyBinaries(usize, usize),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("leader {leader}: {source}")]
    Leader {
        leader: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach a 1-based leader index to an error.
    pub fn for_leader(self, i: usize) -> Error {
        Error::Leader {
            leader: i + 1,
            source: Box::new(self),
        }
    }
}

impl From<QpError> for Error {
    fn from(e: QpError) -> Self {
        match e {
            QpError::Infeasible(_) => Error::Infeasible(e.to_string()),
            QpError::Unbounded => Error::Unbounded(e.to_string()),
            QpError::Dimension(s) => Error::Dimension(s),
            other => Error::Solver(other.to_string()),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
