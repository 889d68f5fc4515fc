//! Wire shapes of the JSON-RPC responses used here.

use std::fmt;
use std::str::FromStr;

use ppos_core::ethstate::{AccountProofBundle, AccountState, StorageProof};
use ppos_core::hexfmt;
use ppos_core::{Amount, Digest32};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::RpcError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockId {
    Number(u64),
    Hash(Digest32),
    /// `latest`, `finalized`, `safe`, ...
    Tag(String),
}

impl BlockId {
    /// Block parameter for `eth_getBlockBy*`: `(method, first param)`.
    pub fn block_query(&self) -> (&'static str, Value) {
        match self {
            BlockId::Number(n) => ("eth_getBlockByNumber", json!(format!("{n:#x}"))),
            BlockId::Hash(h) => ("eth_getBlockByHash", json!(h.to_hex())),
            BlockId::Tag(t) => ("eth_getBlockByNumber", json!(t)),
        }
    }
}

impl FromStr for BlockId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(hex) = s.strip_prefix("0x") {
            if hex.len() == 64 {
                return s.parse().map(BlockId::Hash).map_err(|e| format!("{e}"));
            }
            return u64::from_str_radix(hex, 16).map(BlockId::Number).map_err(|e| e.to_string());
        }
        if s.chars().all(|c| c.is_ascii_digit()) && !s.is_empty() {
            return s.parse().map(BlockId::Number).map_err(|e| e.to_string());
        }
        match s {
            "latest" | "finalized" | "safe" | "earliest" => Ok(BlockId::Tag(s.to_string())),
            _ => Err(format!("unrecognized block id {s:?}")),
        }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockId::Number(n) => write!(f, "{n}"),
            BlockId::Hash(h) => write!(f, "{h}"),
            BlockId::Tag(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StorageProofResponse {
    pub key: String,
    pub value: String,
    pub proof: Vec<String>,
}

/// Result of `eth_getProof`. Hex strings are kept as received.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProofResponse {
    pub address: String,
    pub account_proof: Vec<String>,
    pub balance: String,
    pub code_hash: String,
    pub nonce: String,
    pub storage_hash: String,
    #[serde(default)]
    pub storage_proof: Vec<StorageProofResponse>,
}

fn malformed(what: &str, e: impl fmt::Display) -> RpcError {
    RpcError::Malformed(format!("{what}: {e}"))
}

fn nodes(list: &[String], what: &str) -> Result<Vec<Vec<u8>>, RpcError> {
    list.iter().map(|n| hexfmt::decode(n).map_err(|e| malformed(what, e))).collect()
}

/// Storage keys come back either as full 32-byte words or as quantities
/// with leading zeros stripped, depending on the client.
fn storage_key(s: &str) -> Result<[u8; 32], RpcError> {
    let raw = hexfmt::strip_prefix(s);
    if raw.len() > 64 {
        return Err(malformed("storage key", format!("{} hex digits", raw.len())));
    }
    let padded = format!("{raw:0>64}");
    hexfmt::decode_array::<32>(&padded).map_err(|e| malformed("storage key", e))
}

impl ProofResponse {
    /// Pairs the proof with its header. Proof nodes are decoded from hex
    /// but otherwise kept byte-for-byte.
    pub fn to_bundle(&self, block_hash: Digest32, header_rlp: Vec<u8>) -> Result<AccountProofBundle, RpcError> {
        let amount = |s: &str, what: &str| s.parse::<Amount>().map_err(|e| malformed(what, e));
        let account = AccountState {
            nonce: ppos_core::ethstate::quantity::u64::parse(&self.nonce).map_err(|e| malformed("nonce", e))?,
            balance: amount(&self.balance, "balance")?,
            storage_root: self.storage_hash.parse().map_err(|e| malformed("storageHash", e))?,
            code_hash: self.code_hash.parse().map_err(|e| malformed("codeHash", e))?,
        };
        let storage_proofs = self
            .storage_proof
            .iter()
            .map(|sp| {
                Ok(StorageProof {
                    key: storage_key(&sp.key)?,
                    value: amount(&sp.value, "storage value")?,
                    proof: nodes(&sp.proof, "storage proof")?,
                })
            })
            .collect::<Result<_, RpcError>>()?;
        Ok(AccountProofBundle {
            block_hash,
            header_rlp,
            address: hexfmt::decode_array(&self.address).map_err(|e| malformed("address", e))?,
            account,
            account_proof: nodes(&self.account_proof, "account proof")?,
            storage_proofs,
        })
    }
}
