use std::path::PathBuf;

use thiserror::Error;

use crate::contact::SolveReport;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    /// The nonlinear solve stopped without converging. The report carries
    /// the reason (`MaxIters` or `SingularSystem`) and the iteration history.
    #[error("nonlinear solve failed ({:?}) after {} iterations", .0.terminated_by, .0.iterations)]
    Solve(Box<SolveReport>),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
