//! Error type shared by the simulation library.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates its documented bound. `key` names the
    /// offending field, `detail` states the expected range and the actual value.
    #[error("{key}: {detail}")]
    Validation { key: String, detail: String },

    /// Geometry query with no defined answer (e.g. coincident positions).
    #[error("degenerate geometry: {0}")]
    Geometry(String),

    /// The ISL grid cannot be formed or traversed as requested.
    #[error("topology: {0}")]
    Topology(String),

    /// An input lies outside the mathematical domain of an operation.
    #[error("domain: {0}")]
    Domain(String),

    /// Age metrics are undefined because nothing reached the ground station.
    #[error("no delivered frames within the observation horizon")]
    NoDeliveredFrames,
}

impl Error {
    pub fn validation(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation { key: key.into(), detail: detail.into() }
    }
}
