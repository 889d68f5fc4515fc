//! Generates the repository's pinned fixtures.
//!
//! Two sources: the mainnet genesis allocation, from which account proofs
//! under the real genesis block are rebuilt, and a seeded synthetic devnet
//! used by the end-to-end scenario.

pub mod devnet;
pub mod genesis;
pub mod scenario;
pub mod state;

use std::path::{Path, PathBuf};

use ppos_core::btcstate::{write_chainstate, BtcStateError};
use ppos_core::hexfmt;
use ppos_rpc::{record_fixture, RpcError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("source data: {0}")]
    Source(String),
    #[error("self-check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Rpc(#[from] RpcError),
    #[error(transparent)]
    Btc(#[from] BtcStateError),
}

pub const GENESIS_SOURCE: &str = "source/mainnet-genesis.json";
pub const DEFAULT_SEED: u64 = 7;

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), GenError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| GenError::Check(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes every generated fixture under `root`, reading source data from
/// `root/source`. Returns the written paths.
pub fn write_all(root: &Path, seed: u64, recorded_at: u64) -> Result<Vec<PathBuf>, GenError> {
    let mut written = Vec::new();
    for dir in ["eth", "btc", "liabilities"] {
        std::fs::create_dir_all(root.join(dir))?;
    }

    let g = genesis::load_genesis(&root.join(GENESIS_SOURCE))?;
    let gf = genesis::genesis_fixtures(&g, recorded_at)?;
    let p = root.join("eth/mainnet-genesis-block.json");
    write_json(&p, &gf.block)?;
    written.push(p);
    for f in &gf.fixtures {
        let p = root.join(format!("eth/mainnet-genesis-{}.json", hexfmt::strip_prefix(&f.response.proof.address)));
        record_fixture(f, &p)?;
        written.push(p);
    }

    let d = devnet::build_devnet(seed, recorded_at)?;
    let p = root.join(&d.keys.block_fixture);
    write_json(&p, &d.block)?;
    written.push(p);
    for (c, f) in d.keys.eth_custodians.iter().zip(&d.eth_fixtures) {
        let p = root.join(&c.fixture);
        record_fixture(f, &p)?;
        written.push(p);
    }
    let p = root.join(&d.keys.token.fixture);
    record_fixture(&d.erc20_fixture, &p)?;
    written.push(p);

    let p = root.join(&d.keys.chainstate);
    write_chainstate(&d.snapshot, std::fs::File::create(&p)?)?;
    written.push(p);

    let p = root.join(&d.keys.users);
    let mut text = String::new();
    for u in &d.users {
        text.push_str(&serde_json::to_string(u).map_err(|e| GenError::Check(e.to_string()))?);
        text.push('\n');
    }
    std::fs::write(&p, text)?;
    written.push(p);

    let p = root.join("devnet-keys.json");
    write_json(&p, &d.keys)?;
    written.push(p);
    Ok(written)
}
