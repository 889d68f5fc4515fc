//! Offline fixtures: the raw responses behind a bundle plus the bundle
//! itself, sealed by a digest that leaves out the recording time.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ppos_core::ethstate::AccountProofBundle;
use ppos_core::hashcodec::keccak256;
use ppos_core::Digest32;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::header::validated_header;
use crate::types::ProofResponse;
use crate::RpcError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureResponse {
    pub proof: ProofResponse,
    pub block: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedFixture {
    pub method: String,
    pub params: Value,
    pub response: FixtureResponse,
    /// Unix seconds; not covered by the digest.
    pub recorded_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub digest: Digest32,
    pub bundle: AccountProofBundle,
}

fn content_digest(
    method: &str,
    params: &Value,
    response: &FixtureResponse,
    note: &Option<String>,
    bundle: &AccountProofBundle,
) -> Digest32 {
    let body = json!({
        "method": method,
        "params": params,
        "response": response,
        "note": note,
        "bundle": bundle,
    });
    keccak256(serde_json::to_vec(&body).expect("json values serialize"))
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RecordedFixture {
    pub fn new(
        params: Value,
        response: FixtureResponse,
        note: Option<String>,
        bundle: AccountProofBundle,
        recorded_at: u64,
    ) -> Self {
        let method = "eth_getProof".to_string();
        let digest = content_digest(&method, &params, &response, &note, &bundle);
        RecordedFixture { method, params, response, recorded_at, note, digest, bundle }
    }

    /// Checks the digest, re-derives the bundle from the raw responses, and
    /// re-verifies it against its header.
    pub fn check(&self) -> Result<(), RpcError> {
        let digest = content_digest(&self.method, &self.params, &self.response, &self.note, &self.bundle);
        if digest != self.digest {
            return Err(RpcError::FixtureCorrupt(format!("digest {digest} != recorded {}", self.digest)));
        }
        let (hash, header_rlp) = validated_header(&self.response.block)
            .map_err(|e| RpcError::FixtureCorrupt(format!("block: {e}")))?;
        let derived = self
            .response
            .proof
            .to_bundle(hash, header_rlp)
            .map_err(|e| RpcError::FixtureCorrupt(format!("proof: {e}")))?;
        if derived != self.bundle {
            return Err(RpcError::FixtureCorrupt("bundle differs from the recorded responses".into()));
        }
        self.bundle.validate()?;
        Ok(())
    }
}

pub fn record_fixture(fixture: &RecordedFixture, path: &Path) -> Result<(), RpcError> {
    let mut text = serde_json::to_string_pretty(fixture).expect("fixtures serialize");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_fixture(path: &Path) -> Result<RecordedFixture, RpcError> {
    let text = std::fs::read_to_string(path)?;
    let fixture: RecordedFixture =
        serde_json::from_str(&text).map_err(|e| RpcError::FixtureCorrupt(e.to_string()))?;
    fixture.check()?;
    Ok(fixture)
}
