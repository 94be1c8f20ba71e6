//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A regime-specific formula was called outside its regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// An operation was applied to a state that cannot accept it.
    #[error("state error: {0}")]
    State(String),

    /// A configuration file or override is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Input data (traces, metadata, sample sets) is unusable.
    #[error("input error: {0}")]
    Input(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
