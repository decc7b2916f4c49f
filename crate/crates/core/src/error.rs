use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration table is malformed. `table` names the offending table
    /// or field so command-line users can find it.
    #[error("invalid configuration in `{table}`: {reason}")]
    Config { table: String, reason: String },

    /// A numerical precondition failed (non-positive input, singular matrix).
    #[error("domain error: {0}")]
    Domain(String),

    /// Epidemic seeding never reached its exposure target.
    #[error("epidemic seeding failed after {attempts} attempts (best cumulative exposed {best}, target {target})")]
    SeedingFailed {
        attempts: u32,
        best: usize,
        target: usize,
    },

    /// Regionalization produced negative residual final demand.
    #[error("negative residual final demand for industries {industries:?} in region {region}")]
    NegativeFinalDemand {
        region: &'static str,
        industries: Vec<String>,
    },

    #[error("ABC accepted no parameter combination; nearest misses: {0}")]
    NoAcceptance(String),

    #[error("missing dates in series: {0:?}")]
    MissingDates(Vec<String>),

    /// A configuration file could not be read.
    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid json in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(table: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            table: table.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Json { .. } | Error::Read { .. } | Error::MissingDates(_)
        )
    }
}

/// Loads a JSON document from disk into `T`.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
