use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty structure: no atoms found")]
    EmptyStructure,

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("unsupported token: {0}")]
    UnsupportedToken(String),

    #[error("unknown element: {0}")]
    UnknownElement(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("no isomorphism between template and target graphs")]
    MappingFailure,

    #[error("search budget exhausted: {0}")]
    ResourceExhausted(String),

    #[error("manifest error at line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
