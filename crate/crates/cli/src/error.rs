use std::path::PathBuf;

use thiserror::Error;

use crate::llm::LlmError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("report bundle invalid at `{pointer}`: {message}")]
    Schema { pointer: String, message: String },
    #[error(transparent)]
    Core(#[from] causalfair_core::Error),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 data, 4 cardinality cap, 5 network.
    pub fn exit_code(&self) -> i32 {
        use causalfair_core::Error as C;
        match self {
            Error::Config { .. } | Error::Schema { .. } => 2,
            Error::Io { .. } | Error::Csv { .. } => 3,
            Error::Llm(e) => e.exit_code(),
            Error::Core(e) => match e {
                C::CardinalityCap { .. } => 4,
                C::InvalidRoles(_)
                | C::InvalidArgument(_)
                | C::InvalidColumnSpec { .. }
                | C::InvalidBinning { .. }
                | C::InvalidScm(_)
                | C::InvalidQuery(_)
                | C::UnknownColumn(_) => 2,
                C::UnknownState { .. }
                | C::HeaderMismatch(_)
                | C::UnparseableCell { .. }
                | C::EmptyAfterCleaning { .. }
                | C::NonNumericColumn(_)
                | C::UnidentifiableCell(_) => 3,
                C::IdentityBreach { .. } => 1,
            },
        }
    }
}
