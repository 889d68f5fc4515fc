use std::sync::atomic::{AtomicU64, Ordering};

use ppos_core::ethstate::AccountProofBundle;
use ppos_core::{hexfmt, Digest32};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::RpcConfig;
use crate::fixture::{now_unix, FixtureResponse, RecordedFixture};
use crate::header::validated_header;
use crate::types::{BlockId, ProofResponse};
use crate::RpcError;

#[derive(Debug, Deserialize)]
struct RpcErrorObject {
    code: i64,
    message: String,
}

#[derive(Debug, Deserialize)]
struct Envelope {
    #[serde(default)]
    result: Option<Value>,
    #[serde(default)]
    error: Option<RpcErrorObject>,
}

pub struct RpcClient {
    config: RpcConfig,
    agent: ureq::Agent,
    next_id: AtomicU64,
}

impl RpcClient {
    pub fn new(config: RpcConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout()).build();
        RpcClient { config, agent, next_id: AtomicU64::new(1) }
    }

    pub fn config(&self) -> &RpcConfig {
        &self.config
    }

    /// One JSON-RPC call. Transport failures, 429 and 5xx are retried with
    /// backoff; JSON-RPC error objects are returned immediately.
    pub fn call(&self, method: &str, params: Value) -> Result<Value, RpcError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let body = json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params});
        let mut attempts = 0;
        loop {
            attempts += 1;
            let outcome = self.agent.post(&self.config.url).send_json(body.clone());
            let retryable = match outcome {
                Ok(resp) => {
                    let env: Envelope = resp
                        .into_json()
                        .map_err(|e| RpcError::Malformed(format!("{method}: {e}")))?;
                    if let Some(err) = env.error {
                        return Err(RpcError::Rpc { code: err.code, message: err.message });
                    }
                    return match env.result {
                        Some(Value::Null) | None => Err(RpcError::Malformed(format!("{method}: null result"))),
                        Some(v) => Ok(v),
                    };
                }
                Err(ureq::Error::Status(code, _)) if code == 429 || code >= 500 => format!("http status {code}"),
                Err(ureq::Error::Status(code, resp)) => {
                    return Err(RpcError::Transport {
                        attempts,
                        message: format!("http status {code}: {}", resp.into_string().unwrap_or_default()),
                    })
                }
                Err(ureq::Error::Transport(t)) => t.to_string(),
            };
            if attempts > self.config.max_retries {
                return Err(RpcError::Transport { attempts, message: retryable });
            }
            std::thread::sleep(self.config.backoff(attempts));
        }
    }

    /// Block object (without transactions) for `block`.
    pub fn fetch_block(&self, block: &BlockId) -> Result<Value, RpcError> {
        let (method, id) = block.block_query();
        self.call(method, json!([id, false]))
    }

    /// Header bytes whose hash equals the node-reported block hash.
    pub fn fetch_block_header(&self, block: &BlockId) -> Result<(Digest32, Vec<u8>), RpcError> {
        validated_header(&self.fetch_block(block)?)
    }

    /// Account proof at `block`, paired with that block's header and
    /// checked locally before it is returned.
    pub fn fetch_account_proof(
        &self,
        address: &[u8; 20],
        storage_keys: &[[u8; 32]],
        block: &BlockId,
    ) -> Result<(AccountProofBundle, RecordedFixture), RpcError> {
        let block_json = self.fetch_block(block)?;
        let (hash, header_rlp) = validated_header(&block_json)?;
        let keys: Vec<String> = storage_keys.iter().map(hexfmt::encode).collect();
        // Pin the proof to the header just fetched, whatever `block` was.
        let params = json!([hexfmt::encode(address), keys, {"blockHash": hash.to_hex()}]);
        let raw = self.call("eth_getProof", params.clone())?;
        let proof: ProofResponse =
            serde_json::from_value(raw).map_err(|e| RpcError::Malformed(format!("eth_getProof: {e}")))?;
        let bundle = proof.to_bundle(hash, header_rlp)?;
        if bundle.address != *address {
            return Err(RpcError::Malformed("proof is for a different address".into()));
        }
        bundle.validate()?;
        let fixture = RecordedFixture::new(
            params,
            FixtureResponse { proof, block: block_json },
            None,
            bundle.clone(),
            now_unix(),
        );
        Ok((bundle, fixture))
    }
}
