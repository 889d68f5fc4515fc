//! Endpoint configuration: a TOML file with an `[rpc]` table, then
//! environment overrides.

use std::path::Path;
use std::time::Duration;

use serde::Deserialize;

use crate::RpcError;

pub const ENV_URL: &str = "PPOS_RPC_URL";
pub const ENV_TIMEOUT_MS: &str = "PPOS_RPC_TIMEOUT_MS";
pub const ENV_RETRIES: &str = "PPOS_RPC_RETRIES";
/// Set to `1` to run tests that talk to a live node.
pub const ENV_LIVE: &str = "PPOS_LIVE_RPC";

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RpcConfig {
    pub url: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
}

impl Default for RpcConfig {
    fn default() -> Self {
        RpcConfig {
            url: "http://127.0.0.1:8545".into(),
            timeout_ms: 10_000,
            max_retries: 3,
            backoff_base_ms: 200,
            backoff_max_ms: 5_000,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
struct ConfigFile {
    #[serde(default)]
    rpc: Option<RpcConfig>,
}

impl RpcConfig {
    pub fn from_toml(text: &str) -> Result<Self, RpcError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| RpcError::Config(e.to_string()))?;
        Ok(file.rpc.unwrap_or_default())
    }

    /// Reads `path` if given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, RpcError> {
        let base = match path {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p)?)?,
            None => Self::default(),
        };
        base.with_overrides(|k| std::env::var(k).ok())
    }

    pub fn with_overrides(mut self, get: impl Fn(&str) -> Option<String>) -> Result<Self, RpcError> {
        if let Some(url) = get(ENV_URL) {
            self.url = url;
        }
        if let Some(t) = get(ENV_TIMEOUT_MS) {
            self.timeout_ms = t.parse().map_err(|e| RpcError::Config(format!("{ENV_TIMEOUT_MS}: {e}")))?;
        }
        if let Some(r) = get(ENV_RETRIES) {
            self.max_retries = r.parse().map_err(|e| RpcError::Config(format!("{ENV_RETRIES}: {e}")))?;
        }
        Ok(self)
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Delay before retry number `retry` (1-based): base * 2^(retry-1),
    /// capped at `backoff_max_ms`.
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor).min(self.backoff_max_ms))
    }
}
