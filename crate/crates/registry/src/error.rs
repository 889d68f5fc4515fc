use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors carry only strings and numbers so they can cross the HTTP
/// boundary unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail")]
pub enum RegistryError {
    #[error("round {0} is still open")]
    PreviousRoundOpen(u64),
    #[error("round {round_id} is {status}; cannot {operation}")]
    WrongStatus { round_id: u64, status: String, operation: String },
    #[error("attestation invalid: {0}")]
    AttestationInvalid(String),
    #[error("snapshot mismatch: {0}")]
    SnapshotMismatch(String),
    #[error("binding mismatch: {0}")]
    BindingMismatch(String),
    #[error("unknown round {0}")]
    UnknownRound(u64),
    #[error("event log line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
    #[error("io: {0}")]
    Io(String),
    #[error("request: {0}")]
    BadRequest(String),
    #[error("transport: {0}")]
    Transport(String),
}

impl From<std::io::Error> for RegistryError {
    fn from(e: std::io::Error) -> Self {
        RegistryError::Io(e.to_string())
    }
}

impl RegistryError {
    /// HTTP status used by the server for this error.
    pub fn http_status(&self) -> u16 {
        match self {
            RegistryError::UnknownRound(_) => 404,
            RegistryError::PreviousRoundOpen(_) | RegistryError::WrongStatus { .. } => 409,
            RegistryError::AttestationInvalid(_)
            | RegistryError::SnapshotMismatch(_)
            | RegistryError::BindingMismatch(_) => 422,
            RegistryError::BadRequest(_) => 400,
            RegistryError::CorruptLog { .. } | RegistryError::Io(_) | RegistryError::Transport(_) => 500,
        }
    }
}
