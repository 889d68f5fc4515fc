use thiserror::Error;

use crate::hashcodec::{keccak256, rlp, Digest32};

/// Position of the state root in every Ethereum header schema to date.
pub const STATE_ROOT_INDEX: usize = 3;
/// Fields present since the first header schema.
pub const MIN_HEADER_FIELDS: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed header: {0}")]
pub struct MalformedHeader(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderCommitment {
    pub block_hash: Digest32,
    pub state_root: Digest32,
}

/// Hashes an RLP header and extracts its state root. Only the list shape
/// and the state root are interpreted; fields added by later forks pass
/// through untouched.
pub fn header_hash(header_rlp: &[u8]) -> Result<HeaderCommitment, MalformedHeader> {
    let item = rlp::decode(header_rlp).map_err(|e| MalformedHeader(e.to_string()))?;
    let fields = item.as_list().map_err(|e| MalformedHeader(e.to_string()))?;
    if fields.len() < MIN_HEADER_FIELDS {
        return Err(MalformedHeader(format!(
            "{} fields, expected at least {MIN_HEADER_FIELDS}",
            fields.len()
        )));
    }
    let root = fields[STATE_ROOT_INDEX]
        .as_bytes()
        .map_err(|e| MalformedHeader(e.to_string()))?;
    let state_root = Digest32::from_slice(root)
        .ok_or_else(|| MalformedHeader(format!("state root of {} bytes", root.len())))?;
    Ok(HeaderCommitment { block_hash: keccak256(header_rlp), state_root })
}
