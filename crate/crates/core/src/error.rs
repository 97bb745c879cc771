use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}:{line}: malformed row in column `{column}`: {message}")]
    MalformedRow {
        path: String,
        line: usize,
        column: String,
        message: String,
    },

    #[error("log failed validation: {0}")]
    InvalidLog(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("background knowledge conflict on edge {from} -> {to}: {message}")]
    BackgroundConflict {
        from: String,
        to: String,
        message: String,
    },

    #[error("estimator error: {0}")]
    Estimator(String),

    #[error("training error: {0}")]
    Train(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
