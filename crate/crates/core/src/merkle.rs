//! Padded binary Merkle tree with domain-separated Keccak hashing.
//!
//! Leaves hash as `keccak256(0x00 || bytes)` and internal nodes as
//! `keccak256(0x01 || left || right)`. The leaf row is padded to the next
//! power of two with [`EMPTY_LEAF`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashcodec::{keccak256_concat, Digest32};

pub const LEAF_PREFIX: u8 = 0x00;
pub const NODE_PREFIX: u8 = 0x01;

/// Padding digest, `keccak256(0x00)`.
pub const EMPTY_LEAF: Digest32 = Digest32([
    0xbc, 0x36, 0x78, 0x9e, 0x7a, 0x1e, 0x28, 0x14, 0x36, 0x46, 0x42, 0x29, 0x82, 0x8f, 0x81, 0x7d,
    0x66, 0x12, 0xf7, 0xb4, 0x77, 0xd6, 0x65, 0x91, 0xff, 0x96, 0xa9, 0xe0, 0x64, 0xbc, 0xc9, 0x8a,
]);

/// Paths longer than this cannot come from a tree that fits in memory.
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MerkleError {
    #[error("cannot build a tree over zero leaves")]
    EmptyInput,
    #[error("leaf index {index} out of range for width {width}")]
    IndexOutOfRange { index: u64, width: u64 },
}

pub fn leaf_hash(bytes: &[u8]) -> Digest32 {
    keccak256_concat(&[&[LEAF_PREFIX], bytes])
}

pub fn node_hash(left: &Digest32, right: &Digest32) -> Digest32 {
    keccak256_concat(&[&[NODE_PREFIX], left.as_ref(), right.as_ref()])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    /// `levels[0]` is the padded leaf row, the last level holds only the root.
    levels: Vec<Vec<Digest32>>,
    real_leaf_count: usize,
}

impl MerkleTree {
    pub fn build<L: AsRef<[u8]>>(leaves: &[L]) -> Result<Self, MerkleError> {
        let digests: Vec<Digest32> = leaves.iter().map(|l| leaf_hash(l.as_ref())).collect();
        Self::from_leaf_digests(digests)
    }

    /// Builds from already-hashed leaves (`leaf_hash` of each leaf).
    pub fn from_leaf_digests(mut row: Vec<Digest32>) -> Result<Self, MerkleError> {
        if row.is_empty() {
            return Err(MerkleError::EmptyInput);
        }
        let real_leaf_count = row.len();
        row.resize(real_leaf_count.next_power_of_two(), EMPTY_LEAF);
        let mut levels = vec![row];
        while levels.last().map_or(0, Vec::len) > 1 {
            let prev = levels.last().expect("non-empty");
            let next = prev
                .chunks_exact(2)
                .map(|pair| node_hash(&pair[0], &pair[1]))
                .collect();
            levels.push(next);
        }
        Ok(MerkleTree { levels, real_leaf_count })
    }

    /// Rebuilds a tree from serialized levels, checking every node.
    pub fn from_levels(levels: Vec<Vec<Digest32>>, real_leaf_count: usize) -> Option<Self> {
        let leaves = levels.first()?;
        if real_leaf_count == 0 || real_leaf_count > leaves.len() {
            return None;
        }
        let rebuilt = Self::from_leaf_digests(leaves[..real_leaf_count].to_vec()).ok()?;
        (rebuilt.levels == levels).then_some(rebuilt)
    }

    pub fn root(&self) -> Digest32 {
        self.levels.last().expect("tree has a root")[0]
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn width(&self) -> usize {
        self.levels[0].len()
    }

    pub fn real_leaf_count(&self) -> usize {
        self.real_leaf_count
    }

    pub fn levels(&self) -> &[Vec<Digest32>] {
        &self.levels
    }

    pub fn leaf_digest(&self, index: usize) -> Option<Digest32> {
        self.levels[0].get(index).copied()
    }

    pub fn prove(&self, index: usize) -> Result<MerklePath, MerkleError> {
        if index >= self.width() {
            return Err(MerkleError::IndexOutOfRange {
                index: index as u64,
                width: self.width() as u64,
            });
        }
        let siblings = self.levels[..self.depth()]
            .iter()
            .enumerate()
            .map(|(level, row)| row[(index >> level) ^ 1])
            .collect();
        Ok(MerklePath { leaf_index: index as u64, siblings })
    }
}

/// Inclusion proof: siblings bottom-up, side chosen by the bits of
/// `leaf_index` (least significant bit is level 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerklePath {
    pub leaf_index: u64,
    pub siblings: Vec<Digest32>,
}

impl MerklePath {
    /// Root implied by a leaf digest, or `None` if the index does not fit
    /// the path length.
    pub fn compute_root(&self, leaf: Digest32) -> Option<Digest32> {
        let depth = self.siblings.len();
        if depth > MAX_DEPTH || (depth < 64 && self.leaf_index >> depth != 0) {
            return None;
        }
        let mut acc = leaf;
        for (level, sib) in self.siblings.iter().enumerate() {
            acc = if (self.leaf_index >> level) & 1 == 0 {
                node_hash(&acc, sib)
            } else {
                node_hash(sib, &acc)
            };
        }
        Some(acc)
    }
}

pub fn verify_inclusion(root: &Digest32, leaf_bytes: &[u8], path: &MerklePath) -> bool {
    path.compute_root(leaf_hash(leaf_bytes)).as_ref() == Some(root)
}
