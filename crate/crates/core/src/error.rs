use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A record in the input stream could not be decoded or parsed.
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    /// The input violates the expected schema (missing fields, bad header,
    /// empty user id, duplicate rows).
    #[error("{0}")]
    Schema(String),

    /// Degenerate or non-finite numeric data.
    #[error("{0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// Wraps an error with the pipeline stage it occurred in.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn malformed(line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            line,
            message: message.into(),
        }
    }

    pub fn in_stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Process exit code for the CLI: 2 input/schema, 3 numeric, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Malformed { .. } | Error::Schema(_) | Error::Json(_) => 2,
            Error::Numeric(_) => 3,
            Error::Io(_) => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}
