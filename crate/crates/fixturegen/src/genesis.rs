//! Account proofs over the mainnet genesis state.
//!
//! The state is rebuilt from the published genesis allocation, and both
//! the state root and the genesis block hash are checked against their
//! well-known values before anything is emitted.

use std::collections::BTreeMap;
use std::path::Path;

use ppos_core::hashcodec::{keccak256, EMPTY_TRIE_ROOT};
use ppos_core::{hexfmt, Amount, Digest32};
use ppos_rpc::{encode_header, FixtureResponse, RecordedFixture};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::state::{build_state, AccountSpec, BuiltState};
use crate::GenError;

pub const MAINNET_GENESIS_HASH: &str = "0xd4e56740f876aef8c010b86a40d5f56745a118d0906a34e69aec8c0db1cb8fa3";
pub const MAINNET_GENESIS_STATE_ROOT: &str = "0xd7f8974fb5ac78d9ac099b9ad5018bedc2ce0a72dad1827a1709da30580f0544";

pub const NOTE: &str = "eth_getProof response reconstructed from the published mainnet genesis \
allocation (no live node was reachable when the fixture was made); the state root and block hash \
match mainnet block 0";

#[derive(Debug, Deserialize)]
struct AllocEntry {
    balance: String,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct GenesisFile {
    nonce: String,
    timestamp: String,
    extra_data: String,
    gas_limit: String,
    difficulty: String,
    mix_hash: String,
    coinbase: String,
    number: String,
    gas_used: String,
    parent_hash: String,
    alloc: BTreeMap<String, AllocEntry>,
}

pub struct Genesis {
    pub alloc: BTreeMap<[u8; 20], Amount>,
    /// Header fields in block-object form, without `hash`.
    pub header: Map<String, Value>,
}

pub fn load_genesis(path: &Path) -> Result<Genesis, GenError> {
    let text = std::fs::read_to_string(path)?;
    let file: GenesisFile = serde_json::from_str(&text).map_err(|e| GenError::Source(e.to_string()))?;
    let mut alloc = BTreeMap::new();
    for (addr, entry) in &file.alloc {
        let a = hexfmt::decode_array::<20>(addr).map_err(|e| GenError::Source(format!("{addr}: {e}")))?;
        let b: Amount = entry.balance.parse().map_err(|e| GenError::Source(format!("{addr}: {e}")))?;
        alloc.insert(a, b);
    }
    let nonce = u64::from_str_radix(hexfmt::strip_prefix(&file.nonce), 16)
        .map_err(|e| GenError::Source(format!("nonce: {e}")))?;
    let header = json!({
        "parentHash": file.parent_hash,
        "sha3Uncles": keccak256([0xc0]).to_hex(),
        "miner": file.coinbase,
        "stateRoot": Value::Null,
        "transactionsRoot": EMPTY_TRIE_ROOT.to_hex(),
        "receiptsRoot": EMPTY_TRIE_ROOT.to_hex(),
        "logsBloom": hexfmt::encode([0u8; 256]),
        "difficulty": file.difficulty,
        "number": file.number,
        "gasLimit": file.gas_limit,
        "gasUsed": file.gas_used,
        "timestamp": file.timestamp,
        "extraData": file.extra_data,
        "mixHash": file.mix_hash,
        "nonce": hexfmt::encode(nonce.to_be_bytes()),
    });
    let Value::Object(header) = header else { unreachable!() };
    Ok(Genesis { alloc, header })
}

/// Block object for the genesis state, as `eth_getBlockByNumber` returns it.
pub fn block_json(genesis: &Genesis, state_root: Digest32) -> Result<Value, GenError> {
    let mut block = genesis.header.clone();
    block.insert("stateRoot".into(), json!(state_root.to_hex()));
    let mut block = Value::Object(block);
    let hash = keccak256(encode_header(&block)?);
    block["hash"] = json!(hash.to_hex());
    block["transactions"] = json!([]);
    block["uncles"] = json!([]);
    Ok(block)
}

pub fn build_genesis_state(genesis: &Genesis) -> BuiltState {
    let accounts = genesis.alloc.iter().map(|(a, b)| (*a, AccountSpec::eoa(*b))).collect();
    build_state(&accounts)
}

/// Accounts pinned as fixtures: the lowest address, the largest balance,
/// and the smallest balance (ties broken by address).
pub fn pinned_accounts(genesis: &Genesis) -> Vec<[u8; 20]> {
    let first = *genesis.alloc.keys().next().expect("non-empty alloc");
    let richest = genesis.alloc.iter().max_by_key(|(a, b)| (**b, std::cmp::Reverse(**a))).map(|(a, _)| *a);
    let poorest = genesis.alloc.iter().min_by_key(|(a, b)| (**b, **a)).map(|(a, _)| *a);
    let mut out = vec![first];
    for a in [richest, poorest].into_iter().flatten() {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    out
}

pub struct GenesisFixtures {
    pub block: Value,
    pub fixtures: Vec<RecordedFixture>,
}

pub fn genesis_fixtures(genesis: &Genesis, recorded_at: u64) -> Result<GenesisFixtures, GenError> {
    let mut state = build_genesis_state(genesis);
    let root = state.state_root();
    if root.to_hex() != MAINNET_GENESIS_STATE_ROOT {
        return Err(GenError::Check(format!("genesis state root {root} != {MAINNET_GENESIS_STATE_ROOT}")));
    }
    let block = block_json(genesis, root)?;
    let (hash, header_rlp) = ppos_rpc::validated_header(&block)?;
    if hash.to_hex() != MAINNET_GENESIS_HASH {
        return Err(GenError::Check(format!("genesis hash {hash} != {MAINNET_GENESIS_HASH}")));
    }
    let mut fixtures = Vec::new();
    for addr in pinned_accounts(genesis) {
        let proof = state.proof(&addr, &[]);
        let bundle = proof.to_bundle(hash, header_rlp.clone())?;
        let params = json!([hexfmt::encode(addr), Value::Array(vec![]), {"blockHash": hash.to_hex()}]);
        let fixture = RecordedFixture::new(
            params,
            FixtureResponse { proof, block: block.clone() },
            Some(NOTE.into()),
            bundle,
            recorded_at,
        );
        fixture.check()?;
        fixtures.push(fixture);
    }
    Ok(GenesisFixtures { block, fixtures })
}
