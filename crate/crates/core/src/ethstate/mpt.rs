//! Merkle Patricia Trie proof verification.

use thiserror::Error;

use crate::hashcodec::{keccak256, rlp, Digest32, RlpItem, EMPTY_TRIE_ROOT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MptError {
    #[error("invalid proof: no nodes for a non-empty root")]
    EmptyProof,
    #[error("invalid proof: node {0} does not hash to its reference")]
    HashMismatch(usize),
    #[error("invalid proof: node {index} malformed: {reason}")]
    MalformedNode { index: usize, reason: String },
    #[error("invalid proof: path needs more nodes than supplied")]
    Truncated,
    #[error("invalid proof: {0} unused trailing nodes")]
    UnusedNodes(usize),
    #[error("invalid proof: empty key")]
    EmptyKey,
}

/// Reference from a parent to a child node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRef {
    Empty,
    Hash(Digest32),
    /// Child whose encoding is shorter than 32 bytes, embedded in the parent.
    Inline(RlpItem),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MptNode {
    Branch { children: Vec<NodeRef>, value: Vec<u8> },
    Extension { path: Vec<u8>, child: NodeRef },
    Leaf { path: Vec<u8>, value: Vec<u8> },
}

/// Expands bytes into nibbles, high half first.
pub fn to_nibbles(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|b| [b >> 4, b & 0x0f]).collect()
}

/// Decodes a hex-prefix encoded path into `(nibbles, is_leaf)`.
pub fn decode_hex_prefix(encoded: &[u8]) -> Result<(Vec<u8>, bool), String> {
    let first = *encoded.first().ok_or("empty hex-prefix path")?;
    let flag = first >> 4;
    if flag > 3 {
        return Err(format!("bad hex-prefix flag {flag}"));
    }
    let is_leaf = flag & 2 != 0;
    let odd = flag & 1 != 0;
    let mut nibbles = Vec::with_capacity(encoded.len() * 2);
    if odd {
        nibbles.push(first & 0x0f);
    } else if first & 0x0f != 0 {
        return Err("non-zero padding nibble in even path".into());
    }
    nibbles.extend(to_nibbles(&encoded[1..]));
    Ok((nibbles, is_leaf))
}

pub fn encode_hex_prefix(nibbles: &[u8], is_leaf: bool) -> Vec<u8> {
    let flag = if is_leaf { 2u8 } else { 0 };
    let odd = nibbles.len() % 2 == 1;
    let mut out = Vec::with_capacity(nibbles.len() / 2 + 1);
    let rest = if odd {
        out.push(((flag | 1) << 4) | nibbles[0]);
        &nibbles[1..]
    } else {
        out.push(flag << 4);
        nibbles
    };
    for pair in rest.chunks(2) {
        out.push((pair[0] << 4) | pair[1]);
    }
    out
}

fn decode_ref(item: &RlpItem) -> Result<NodeRef, String> {
    match item {
        RlpItem::Bytes(b) if b.is_empty() => Ok(NodeRef::Empty),
        RlpItem::Bytes(b) => Digest32::from_slice(b)
            .map(NodeRef::Hash)
            .ok_or_else(|| format!("child reference of {} bytes", b.len())),
        RlpItem::List(_) => {
            if item.encode().len() >= 32 {
                return Err("inline child of 32 bytes or more".into());
            }
            Ok(NodeRef::Inline(item.clone()))
        }
    }
}

pub fn decode_node_item(item: &RlpItem) -> Result<MptNode, String> {
    let items = item.as_list().map_err(|e| e.to_string())?;
    match items.len() {
        17 => {
            let children = items[..16].iter().map(decode_ref).collect::<Result<Vec<_>, _>>()?;
            let value = items[16].as_bytes().map_err(|e| e.to_string())?.to_vec();
            Ok(MptNode::Branch { children, value })
        }
        2 => {
            let encoded = items[0].as_bytes().map_err(|e| e.to_string())?;
            let (path, is_leaf) = decode_hex_prefix(encoded)?;
            if is_leaf {
                let value = items[1].as_bytes().map_err(|e| e.to_string())?.to_vec();
                Ok(MptNode::Leaf { path, value })
            } else {
                if path.is_empty() {
                    return Err("extension with empty path".into());
                }
                let child = decode_ref(&items[1])?;
                if child == NodeRef::Empty {
                    return Err("extension without child".into());
                }
                Ok(MptNode::Extension { path, child })
            }
        }
        n => Err(format!("node list of {n} items")),
    }
}

pub fn decode_node(bytes: &[u8]) -> Result<MptNode, String> {
    let item = rlp::decode(bytes).map_err(|e| e.to_string())?;
    decode_node_item(&item)
}

/// Walks a proof for `key` under the secure-trie convention (the path is
/// the nibbles of `keccak256(key)`). Returns the proven value, `None` when
/// the proof demonstrates absence, or an error when the proof is invalid.
pub fn verify_mpt_proof(
    expected_root: &Digest32,
    key: &[u8],
    proof: &[Vec<u8>],
) -> Result<Option<Vec<u8>>, MptError> {
    if key.is_empty() {
        return Err(MptError::EmptyKey);
    }
    let path = to_nibbles(keccak256(key).as_ref());
    verify_proof_path(expected_root, &path, proof)
}

/// Proof walk over an explicit nibble path.
pub fn verify_proof_path(
    expected_root: &Digest32,
    path: &[u8],
    proof: &[Vec<u8>],
) -> Result<Option<Vec<u8>>, MptError> {
    if *expected_root == EMPTY_TRIE_ROOT {
        return match proof {
            [] => Ok(None),
            [only] if only.as_slice() == [0x80] => Ok(None),
            [_] => Err(MptError::HashMismatch(0)),
            _ => Err(MptError::UnusedNodes(proof.len() - 1)),
        };
    }
    if proof.is_empty() {
        return Err(MptError::EmptyProof);
    }

    let mut next_node = 0usize;
    let mut pos = 0usize;
    let mut reference = NodeRef::Hash(*expected_root);
    let result = loop {
        let node = match reference {
            NodeRef::Empty => break None,
            NodeRef::Hash(h) => {
                let index = next_node;
                let raw = proof.get(index).ok_or(MptError::Truncated)?;
                if keccak256(raw) != h {
                    return Err(MptError::HashMismatch(index));
                }
                next_node += 1;
                decode_node(raw).map_err(|reason| MptError::MalformedNode { index, reason })?
            }
            NodeRef::Inline(ref item) => {
                let index = next_node.saturating_sub(1);
                decode_node_item(item).map_err(|reason| MptError::MalformedNode { index, reason })?
            }
        };
        match node {
            MptNode::Branch { mut children, value } => {
                if pos == path.len() {
                    break (!value.is_empty()).then_some(value);
                }
                reference = std::mem::replace(&mut children[path[pos] as usize], NodeRef::Empty);
                pos += 1;
            }
            MptNode::Extension { path: ext, child } => {
                if path[pos..].starts_with(&ext) {
                    pos += ext.len();
                    reference = child;
                } else {
                    break None;
                }
            }
            MptNode::Leaf { path: rest, value } => {
                break (path[pos..] == rest[..]).then_some(value);
            }
        }
    };
    if next_node != proof.len() {
        return Err(MptError::UnusedNodes(proof.len() - next_node));
    }
    Ok(result)
}
