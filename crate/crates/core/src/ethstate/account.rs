use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::hashcodec::{rlp, Digest32, RlpItem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed account: {0}")]
pub struct MalformedAccount(pub String);

/// Ethereum account as stored in the state trie: `[nonce, balance,
/// storageRoot, codeHash]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountState {
    #[serde(with = "crate::ethstate::quantity::u64")]
    pub nonce: u64,
    #[serde(with = "crate::ethstate::quantity::amount")]
    pub balance: Amount,
    pub storage_root: Digest32,
    pub code_hash: Digest32,
}

impl AccountState {
    pub fn to_rlp(&self) -> Vec<u8> {
        RlpItem::List(vec![
            RlpItem::u64(self.nonce),
            RlpItem::u256(self.balance.value()),
            RlpItem::bytes(self.storage_root.0.to_vec()),
            RlpItem::bytes(self.code_hash.0.to_vec()),
        ])
        .encode()
    }
}

pub fn decode_account(data: &[u8]) -> Result<AccountState, MalformedAccount> {
    let err = |m: String| MalformedAccount(m);
    let item = rlp::decode(data).map_err(|e| err(e.to_string()))?;
    let fields = item.as_list().map_err(|e| err(e.to_string()))?;
    if fields.len() != 4 {
        return Err(err(format!("expected 4 fields, got {}", fields.len())));
    }
    let nonce = fields[0].as_u64().map_err(|e| err(format!("nonce: {e}")))?;
    let balance = fields[1].as_u256().map_err(|e| err(format!("balance: {e}")))?;
    let digest = |i: usize, name: &str| {
        let b = fields[i].as_bytes().map_err(|e| err(format!("{name}: {e}")))?;
        Digest32::from_slice(b).ok_or_else(|| err(format!("{name}: {} bytes", b.len())))
    };
    Ok(AccountState {
        nonce,
        balance: Amount::new(balance),
        storage_root: digest(2, "storage root")?,
        code_hash: digest(3, "code hash")?,
    })
}
