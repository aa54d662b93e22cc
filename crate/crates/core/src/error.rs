use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("configuration invalid: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<crate::scenario::ConfigIssue>),
    #[error("RINEX parse error at line {line}: {message}")]
    Rinex { line: usize, message: String },
    #[error("no usable ephemeris: {0}")]
    NoEphemeris(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Kepler iteration did not converge for PRN {prn} after {iterations} iterations")]
    KeplerDivergence { prn: u8, iterations: usize },
    #[error("trajectory error: {0}")]
    Trajectory(String),
    #[error("truth data does not cover t = {t:.6} s for PRN {prn}")]
    TruthGap { prn: u8, t: f64 },
    #[error("elevation {elevation_deg:.3} deg is below the {mask_deg} deg mask")]
    BelowMask { elevation_deg: f64, mask_deg: f64 },
    #[error("acquisition error: {0}")]
    Acquisition(String),
    #[error("navigation decode error: {0}")]
    Decode(String),
    #[error("PVT error: {0}")]
    Pvt(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("schema mismatch in {path}: expected `{expected}`, found `{found}`")]
    Schema { path: PathBuf, expected: String, found: String },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }
}
