//! Address ownership by recoverable secp256k1 signatures over a message
//! bound to the round and the liabilities root.

use k256::ecdsa::{RecoveryId, Signature, SigningKey, VerifyingKey};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashcodec::{hash160, keccak256, sha256d, Digest32};
use crate::hexfmt;

pub const PROTOCOL_TAG: &[u8; 7] = b"PPOS-v1";

/// `tag || round_id (BE u64) || liabilities_root || len(chain_tag) (u8) || chain_tag`
pub fn ownership_message(round_id: u64, liabilities_root: &Digest32, chain_tag: &str) -> Vec<u8> {
    let tag = chain_tag.as_bytes();
    let len = u8::try_from(tag.len()).expect("chain tags are at most 255 bytes");
    let mut out = Vec::with_capacity(7 + 8 + 32 + 1 + tag.len());
    out.extend_from_slice(PROTOCOL_TAG);
    out.extend_from_slice(&round_id.to_be_bytes());
    out.extend_from_slice(liabilities_root.as_ref());
    out.push(len);
    out.extend_from_slice(tag);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignatureScheme {
    /// Digest `keccak256(message)`, owner is an Ethereum address.
    EthKeccak,
    /// Digest `sha256d(message)`, owner is a pay-to-public-key-hash script.
    BtcSha256d,
}

impl SignatureScheme {
    pub fn digest(&self, message: &[u8]) -> Digest32 {
        match self {
            SignatureScheme::EthKeccak => keccak256(message),
            SignatureScheme::BtcSha256d => sha256d(message),
        }
    }
}

/// 64-byte compact signature followed by the recovery id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnershipSignature {
    pub scheme: SignatureScheme,
    #[serde(with = "hexfmt::array")]
    pub signature: [u8; 65],
}

/// What the signature is claimed to control.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Owner {
    EthAddress([u8; 20]),
    Script(Vec<u8>),
}

#[derive(Debug, Error)]
pub enum KeyError {
    #[error("invalid secret key")]
    InvalidSecret,
    #[error("signing failed: {0}")]
    Signing(String),
}

pub fn eth_address(key: &VerifyingKey) -> [u8; 20] {
    let point = key.to_encoded_point(false);
    let hash = keccak256(&point.as_bytes()[1..]);
    hash.0[12..].try_into().expect("20 bytes")
}

pub fn p2pkh_script(key: &VerifyingKey) -> Vec<u8> {
    let point = key.to_encoded_point(true);
    let mut script = vec![0x76, 0xa9, 0x14];
    script.extend_from_slice(&hash160(point.as_bytes()));
    script.extend_from_slice(&[0x88, 0xac]);
    script
}

pub fn signing_key(secret: &[u8; 32]) -> Result<SigningKey, KeyError> {
    SigningKey::from_bytes(secret.into()).map_err(|_| KeyError::InvalidSecret)
}

/// Owner controlled by `secret` under `scheme`.
pub fn owner_of(secret: &[u8; 32], scheme: SignatureScheme) -> Result<Owner, KeyError> {
    let key = signing_key(secret)?;
    let vk = key.verifying_key();
    Ok(match scheme {
        SignatureScheme::EthKeccak => Owner::EthAddress(eth_address(vk)),
        SignatureScheme::BtcSha256d => Owner::Script(p2pkh_script(vk)),
    })
}

pub fn sign_ownership(
    secret: &[u8; 32],
    scheme: SignatureScheme,
    message: &[u8],
) -> Result<OwnershipSignature, KeyError> {
    let key = signing_key(secret)?;
    let digest = scheme.digest(message);
    let (sig, recid) = key
        .sign_prehash_recoverable(digest.as_ref())
        .map_err(|e| KeyError::Signing(e.to_string()))?;
    let (sig, recid) = match sig.normalize_s() {
        Some(low) => (low, RecoveryId::new(!recid.is_y_odd(), recid.is_x_reduced())),
        None => (sig, recid),
    };
    let mut bytes = [0u8; 65];
    bytes[..64].copy_from_slice(&sig.to_bytes());
    bytes[64] = recid.to_byte();
    Ok(OwnershipSignature { scheme, signature: bytes })
}

/// Recovers the signer key; rejects high-s signatures so each message has
/// one accepted signature per key and recovery id.
pub fn recover_signer(sig: &OwnershipSignature, message: &[u8]) -> Option<VerifyingKey> {
    let signature = Signature::from_slice(&sig.signature[..64]).ok()?;
    if signature.normalize_s().is_some() {
        return None;
    }
    let v = match sig.signature[64] {
        27 | 28 => sig.signature[64] - 27,
        v => v,
    };
    let recid = RecoveryId::from_byte(v)?;
    let digest = sig.scheme.digest(message);
    VerifyingKey::recover_from_prehash(digest.as_ref(), &signature, recid).ok()
}

pub fn verify_ownership(claimed: &Owner, sig: &OwnershipSignature, message: &[u8]) -> bool {
    let Some(key) = recover_signer(sig, message) else {
        return false;
    };
    match (sig.scheme, claimed) {
        (SignatureScheme::EthKeccak, Owner::EthAddress(addr)) => eth_address(&key) == *addr,
        (SignatureScheme::BtcSha256d, Owner::Script(script)) => p2pkh_script(&key) == *script,
        _ => false,
    }
}
