use ripemd::Ripemd160;
use sha2::{Digest as _, Sha256};
use sha3::Keccak256;

use super::Digest32;

/// Keccak-256 with the original Keccak padding (Ethereum's hash, not SHA3-256).
pub fn keccak256(data: impl AsRef<[u8]>) -> Digest32 {
    Digest32(Keccak256::digest(data.as_ref()).into())
}

/// Keccak-256 over the concatenation of several slices without copying them
/// into one buffer.
pub fn keccak256_concat(parts: &[&[u8]]) -> Digest32 {
    let mut hasher = Keccak256::new();
    for part in parts {
        hasher.update(part);
    }
    Digest32(hasher.finalize().into())
}

pub fn sha256(data: impl AsRef<[u8]>) -> [u8; 32] {
    Sha256::digest(data.as_ref()).into()
}

/// SHA-256 applied twice, as used for Bitcoin block headers and txids.
pub fn sha256d(data: impl AsRef<[u8]>) -> Digest32 {
    Digest32(sha256(sha256(data)))
}

/// RIPEMD-160 of SHA-256, the pay-to-public-key-hash key digest.
pub fn hash160(data: impl AsRef<[u8]>) -> [u8; 20] {
    Ripemd160::digest(sha256(data)).into()
}
