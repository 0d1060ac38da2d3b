use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("infeasible partition: {clients} clients for {samples} samples")]
    InfeasiblePartition { clients: usize, samples: usize },

    #[error("client score undefined for an empty shard")]
    EmptyShard,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("plaintext overflow: {value} does not fit below {bound}")]
    Overflow { value: u64, bound: String },

    #[error("key generation failed: {0}")]
    Keygen(String),

    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Short machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Input(_) => "input",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::InfeasiblePartition { .. } => "infeasible_partition",
            Error::EmptyShard => "empty_shard",
            Error::Parameter(_) => "parameter",
            Error::Aggregation(_) => "aggregation",
            Error::Protocol(_) => "protocol",
            Error::Overflow { .. } => "overflow",
            Error::Keygen(_) => "keygen",
            Error::Config(_) => "config",
            Error::Comparison(_) => "comparison",
            Error::Io { .. } => "io",
            Error::Serialization(_) => "serialization",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
