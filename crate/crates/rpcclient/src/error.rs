use ppos_core::ethstate::BundleError;
use ppos_core::Digest32;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RpcError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("rpc error {code}: {message}")]
    Rpc { code: i64, message: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("header re-encodes to {computed}, node reported {reported}")]
    HeaderReencodeMismatch { computed: Digest32, reported: Digest32 },
    #[error("proof failed local verification: {0}")]
    SelfValidationFailed(#[from] BundleError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture corrupt: {0}")]
    FixtureCorrupt(String),
    #[error("config error: {0}")]
    Config(String),
}
