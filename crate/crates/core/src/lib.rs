//! Simulation core for platoon-based vehicular dynamic spectrum access (VDSA)
//! in TV white space.
//!
//! The crate models a motorway segment on which vehicle platoons exchange
//! periodic control messages over dynamically selected TVWS channels while
//! protecting nearby digital terrestrial television (DTT) receivers. Band
//! selection is driven either by tabular Q-learning agents (ε-greedy or
//! softmax action selection, with ideal or federated Q-table fusion) or by a
//! conventional distributed baseline operating on delayed context-database
//! information.
//!
//! Everything is deterministic given a master seed: identical configuration
//! and seed reproduce results bit-exactly.

pub mod baseline;
pub mod engine;
pub mod experiment;
pub mod learning;
pub mod metrics;
pub mod output;
pub mod pipeline;
pub mod radio;
pub mod rem;
pub mod rng;
pub mod scenario;
pub mod shadow;

pub use experiment::{ExperimentSpec, ResolvedExperiment};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed data file: {0}")]
    DataFile(String),
    #[error("malformed Q-table file: {0}")]
    QTableFormat(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
