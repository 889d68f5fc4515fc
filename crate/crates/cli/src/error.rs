use ppos_registry::RegistryError;
use ppos_rpc::RpcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A proof, bundle or attestation was checked and did not hold.
    #[error("rejected: {0}")]
    Rejected(String),
    /// An input file could not be read as the artifact it should be.
    #[error("malformed input {path}: {reason}")]
    Malformed { path: String, reason: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Rejected(_) | CliError::Malformed { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<RpcError> for CliError {
    fn from(e: RpcError) -> Self {
        match e {
            RpcError::Transport { .. } | RpcError::Io(_) | RpcError::Rpc { .. } => CliError::Io(e.to_string()),
            RpcError::Config(m) => CliError::Usage(m),
            RpcError::Malformed(_)
            | RpcError::HeaderReencodeMismatch { .. }
            | RpcError::SelfValidationFailed(_)
            | RpcError::FixtureCorrupt(_) => CliError::Rejected(e.to_string()),
        }
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::Io(_) | RegistryError::Transport(_) | RegistryError::CorruptLog { .. } => {
                CliError::Io(e.to_string())
            }
            RegistryError::BadRequest(m) => CliError::Usage(m),
            other => CliError::Rejected(other.to_string()),
        }
    }
}
