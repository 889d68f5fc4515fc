//! Header re-encoding from the field-wise JSON a node returns.
//!
//! Fields after the 15 original ones were appended by later upgrades. A
//! block carries a prefix of the optional fields; the node-reported hash
//! decides whether the encoding is right.

use ppos_core::hashcodec::rlp::trim_leading_zeros;
use ppos_core::hashcodec::{keccak256, RlpItem};
use ppos_core::{hexfmt, Amount, Digest32};
use serde_json::Value;

use crate::RpcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Fixed-width byte string (hashes, addresses, bloom, nonce).
    Bytes(usize),
    /// Variable-length byte string.
    Data,
    /// Unsigned integer, minimal big-endian encoding.
    Quantity,
}

/// `(json name, kind, required)` in header order.
pub const HEADER_SCHEMA: &[(&str, FieldKind, bool)] = &[
    ("parentHash", FieldKind::Bytes(32), true),
    ("sha3Uncles", FieldKind::Bytes(32), true),
    ("miner", FieldKind::Bytes(20), true),
    ("stateRoot", FieldKind::Bytes(32), true),
    ("transactionsRoot", FieldKind::Bytes(32), true),
    ("receiptsRoot", FieldKind::Bytes(32), true),
    ("logsBloom", FieldKind::Bytes(256), true),
    ("difficulty", FieldKind::Quantity, true),
    ("number", FieldKind::Quantity, true),
    ("gasLimit", FieldKind::Quantity, true),
    ("gasUsed", FieldKind::Quantity, true),
    ("timestamp", FieldKind::Quantity, true),
    ("extraData", FieldKind::Data, true),
    ("mixHash", FieldKind::Bytes(32), true),
    ("nonce", FieldKind::Bytes(8), true),
    ("baseFeePerGas", FieldKind::Quantity, false),
    ("withdrawalsRoot", FieldKind::Bytes(32), false),
    ("blobGasUsed", FieldKind::Quantity, false),
    ("excessBlobGas", FieldKind::Quantity, false),
    ("parentBeaconBlockRoot", FieldKind::Bytes(32), false),
    ("requestsHash", FieldKind::Bytes(32), false),
];

fn field_item(name: &str, kind: FieldKind, text: &str) -> Result<RlpItem, RpcError> {
    let bad = |e: String| RpcError::Malformed(format!("{name}: {e}"));
    match kind {
        FieldKind::Bytes(n) => {
            let b = hexfmt::decode(text).map_err(|e| bad(e.to_string()))?;
            if b.len() != n {
                return Err(bad(format!("expected {n} bytes, got {}", b.len())));
            }
            Ok(RlpItem::Bytes(b))
        }
        FieldKind::Data => Ok(RlpItem::Bytes(hexfmt::decode(text).map_err(|e| bad(e.to_string()))?)),
        FieldKind::Quantity => {
            let v: Amount = text.parse().map_err(|e| bad(format!("{e}")))?;
            Ok(RlpItem::Bytes(trim_leading_zeros(&v.to_be_bytes()).to_vec()))
        }
    }
}

/// RLP of the header described by a block object. Optional fields are
/// taken while present; a present field after an absent one is an error.
pub fn encode_header(block: &Value) -> Result<Vec<u8>, RpcError> {
    let obj = block.as_object().ok_or_else(|| RpcError::Malformed("block is not an object".into()))?;
    let mut items = Vec::with_capacity(HEADER_SCHEMA.len());
    let mut gap: Option<&str> = None;
    for &(name, kind, required) in HEADER_SCHEMA {
        match obj.get(name).filter(|v| !v.is_null()) {
            Some(v) => {
                if let Some(missing) = gap {
                    return Err(RpcError::Malformed(format!("{name} present but earlier field {missing} absent")));
                }
                let text = v.as_str().ok_or_else(|| RpcError::Malformed(format!("{name} is not a string")))?;
                items.push(field_item(name, kind, text)?);
            }
            None if required => return Err(RpcError::Malformed(format!("missing header field {name}"))),
            None => gap = gap.or(Some(name)),
        }
    }
    Ok(RlpItem::List(items).encode())
}

pub fn reported_hash(block: &Value) -> Result<Digest32, RpcError> {
    block
        .get("hash")
        .and_then(Value::as_str)
        .ok_or_else(|| RpcError::Malformed("block has no hash".into()))?
        .parse()
        .map_err(|e| RpcError::Malformed(format!("hash: {e}")))
}

/// Re-encodes the header and requires it to hash to the reported hash.
pub fn validated_header(block: &Value) -> Result<(Digest32, Vec<u8>), RpcError> {
    let rlp = encode_header(block)?;
    let computed = keccak256(&rlp);
    let reported = reported_hash(block)?;
    if computed != reported {
        return Err(RpcError::HeaderReencodeMismatch { computed, reported });
    }
    Ok((reported, rlp))
}
