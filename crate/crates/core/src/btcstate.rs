//! Bitcoin reserves: a Merkle commitment over a chain-state snapshot and the
//! relation proving ownership of enough UTXOs under it.
//!
//! Chain-state dumps are newline-delimited JSON. The first line is a
//! preamble `{"block_hash": "<hex>"}`, every further line one unspent output
//! `{"txid": "<hex>", "vout": n, "amount_sats": n, "script": "<hex>"}`. The
//! txid is given in internal byte order (not the reversed display order).

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::hashcodec::Digest32;
use crate::hexfmt;
use crate::merkle::{self, MerkleError, MerklePath, MerkleTree};
use crate::verdict::{fail, finish, Check, Reason, RelationVerdict};

#[derive(Debug, Error)]
pub enum BtcStateError {
    #[error("outpoint {txid}:{vout} appears twice")]
    DuplicateOutpoint { txid: String, vout: u32 },
    #[error("line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("snapshot has no UTXOs")]
    EmptyInput,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utxo {
    #[serde(with = "hexfmt::array")]
    pub txid: [u8; 32],
    pub vout: u32,
    #[serde(rename = "amount_sats")]
    pub amount: u64,
    #[serde(rename = "script", with = "hexfmt::bytes")]
    pub script_pubkey: Vec<u8>,
}

impl Utxo {
    /// `txid || vout (LE u32) || amount (LE u64) || script_len (LE u16) || script`
    pub fn leaf_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 4 + 8 + 2 + self.script_pubkey.len());
        out.extend_from_slice(&self.txid);
        out.extend_from_slice(&self.vout.to_le_bytes());
        out.extend_from_slice(&self.amount.to_le_bytes());
        out.extend_from_slice(&(self.script_pubkey.len() as u16).to_le_bytes());
        out.extend_from_slice(&self.script_pubkey);
        out
    }

    fn outpoint(&self) -> ([u8; 32], u32) {
        (self.txid, self.vout)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preamble {
    #[serde(with = "hexfmt::array")]
    pub block_hash: [u8; 32],
}

/// Every active UTXO at one block, sorted by `(txid, vout)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtxoSnapshot {
    #[serde(with = "hexfmt::array")]
    pub block_hash: [u8; 32],
    pub utxos: Vec<Utxo>,
}

/// Canonicalizes records into a snapshot. Input order is irrelevant.
pub fn ingest_records(
    block_hash: [u8; 32],
    records: impl IntoIterator<Item = Utxo>,
) -> Result<UtxoSnapshot, BtcStateError> {
    let mut by_outpoint = BTreeMap::new();
    for utxo in records {
        if utxo.script_pubkey.len() > u16::MAX as usize {
            return Err(BtcStateError::MalformedRecord {
                line: 0,
                reason: "script longer than 65535 bytes".into(),
            });
        }
        if let Some(prev) = by_outpoint.insert(utxo.outpoint(), utxo) {
            return Err(BtcStateError::DuplicateOutpoint {
                txid: hex::encode(prev.txid),
                vout: prev.vout,
            });
        }
    }
    Ok(UtxoSnapshot { block_hash, utxos: by_outpoint.into_values().collect() })
}

/// Reads a chain-state dump (preamble line, then one UTXO per line).
pub fn ingest_chainstate(reader: impl BufRead) -> Result<UtxoSnapshot, BtcStateError> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (line, first) = lines.next().ok_or(BtcStateError::MalformedRecord {
        line: 1,
        reason: "missing preamble".into(),
    })?;
    let preamble: Preamble = serde_json::from_str(&first?).map_err(|e| {
        BtcStateError::MalformedRecord { line, reason: format!("preamble: {e}") }
    })?;
    let mut records = Vec::new();
    for (line, text) in lines {
        let utxo: Utxo = serde_json::from_str(&text?)
            .map_err(|e| BtcStateError::MalformedRecord { line, reason: e.to_string() })?;
        records.push(utxo);
    }
    ingest_records(preamble.block_hash, records)
}

/// Writes a snapshot in the dump format.
pub fn write_chainstate(snapshot: &UtxoSnapshot, mut out: impl std::io::Write) -> std::io::Result<()> {
    let preamble = Preamble { block_hash: snapshot.block_hash };
    writeln!(out, "{}", serde_json::to_string(&preamble)?)?;
    for u in &snapshot.utxos {
        writeln!(out, "{}", serde_json::to_string(u)?)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct UtxoTree {
    tree: MerkleTree,
    snapshot_block: [u8; 32],
    utxo_count: usize,
}

pub fn build_utxo_tree(snapshot: &UtxoSnapshot) -> Result<UtxoTree, BtcStateError> {
    let digests: Vec<Digest32> =
        snapshot.utxos.iter().map(|u| merkle::leaf_hash(&u.leaf_bytes())).collect();
    let tree = MerkleTree::from_leaf_digests(digests).map_err(|e| match e {
        MerkleError::EmptyInput => BtcStateError::EmptyInput,
        other => BtcStateError::MalformedRecord { line: 0, reason: other.to_string() },
    })?;
    Ok(UtxoTree { tree, snapshot_block: snapshot.block_hash, utxo_count: snapshot.utxos.len() })
}

impl UtxoTree {
    pub fn root(&self) -> Digest32 {
        self.tree.root()
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    pub fn snapshot_block(&self) -> [u8; 32] {
        self.snapshot_block
    }

    pub fn utxo_count(&self) -> usize {
        self.utxo_count
    }

    pub fn prove(&self, index: usize) -> Result<MerklePath, MerkleError> {
        self.tree.prove(index)
    }

    /// Collects a witness over every UTXO locked by `script`.
    pub fn witness_for_script(&self, snapshot: &UtxoSnapshot, script: &[u8]) -> BtcReserveWitness {
        let (utxos, paths) = snapshot
            .utxos
            .iter()
            .enumerate()
            .filter(|(_, u)| u.script_pubkey == script)
            .map(|(i, u)| (u.clone(), self.prove(i).expect("index inside tree")))
            .unzip();
        BtcReserveWitness { utxos, paths, script_template: script.to_vec() }
    }

    pub fn statement(&self, min_amount: Amount) -> BtcReserveStatement {
        BtcReserveStatement { utxo_root: self.root(), snapshot_block: self.snapshot_block, min_amount }
    }
}

/// Public input of the Bitcoin reserve relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BtcReserveStatement {
    pub utxo_root: Digest32,
    #[serde(with = "hexfmt::array")]
    pub snapshot_block: [u8; 32],
    pub min_amount: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BtcReserveWitness {
    pub utxos: Vec<Utxo>,
    pub paths: Vec<MerklePath>,
    #[serde(with = "hexfmt::bytes")]
    pub script_template: Vec<u8>,
}

impl BtcReserveWitness {
    pub fn total(&self) -> Amount {
        self.utxos
            .iter()
            .fold(Amount::ZERO, |acc, u| acc.checked_add(Amount::from_u64(u.amount)).expect("u64 sums fit"))
    }
}

/// Accepts iff every witness UTXO is included under the public root, all
/// share the witness locking script, no leaf is counted twice, and their
/// amounts add up to at least the public minimum.
pub fn check_btc_reserve_relation(
    statement: &BtcReserveStatement,
    witness: &BtcReserveWitness,
) -> RelationVerdict {
    finish(btc_checks(statement, witness))
}

fn btc_checks(statement: &BtcReserveStatement, witness: &BtcReserveWitness) -> Check {
    if witness.utxos.is_empty() || witness.utxos.len() != witness.paths.len() {
        return fail(
            Reason::MalformedWitness,
            format!("{} utxos with {} paths", witness.utxos.len(), witness.paths.len()),
        );
    }
    if let Some(i) = witness.utxos.iter().position(|u| u.script_pubkey != witness.script_template) {
        return fail(Reason::MixedScripts, format!("utxo {i} has a different locking script"));
    }
    for (i, (u, p)) in witness.utxos.iter().zip(&witness.paths).enumerate() {
        if !merkle::verify_inclusion(&statement.utxo_root, &u.leaf_bytes(), p) {
            return fail(Reason::BadPath, format!("utxo {i} is not included under the root"));
        }
    }
    let mut seen = HashSet::new();
    for p in &witness.paths {
        if !seen.insert(p.leaf_index) {
            return fail(Reason::DuplicateLeaf, format!("leaf {} counted twice", p.leaf_index));
        }
    }
    let total = witness.total();
    if total < statement.min_amount {
        return fail(
            Reason::InsufficientBalance,
            format!("owned {total} sats < minimum {}", statement.min_amount),
        );
    }
    Ok(())
}
