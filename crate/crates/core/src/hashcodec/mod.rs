//! Byte-exact hashing (Keccak-256, double SHA-256) and the RLP codec.

mod digest;
mod hash;
pub mod rlp;

pub use digest::Digest32;
pub use hash::{hash160, keccak256, keccak256_concat, sha256, sha256d};
pub use rlp::{RlpError, RlpItem};

/// `keccak256([])`, the code hash of an account without code.
pub const EMPTY_CODE_HASH: Digest32 = Digest32([
    0xc5, 0xd2, 0x46, 0x01, 0x86, 0xf7, 0x23, 0x3c, 0x92, 0x7e, 0x7d, 0xb2, 0xdc, 0xc7, 0x03, 0xc0,
    0xe5, 0x00, 0xb6, 0x53, 0xca, 0x82, 0x27, 0x3b, 0x7b, 0xfa, 0xd8, 0x04, 0x5d, 0x85, 0xa4, 0x70,
]);

/// `keccak256(rlp(""))`, the root of an empty Merkle Patricia trie.
pub const EMPTY_TRIE_ROOT: Digest32 = Digest32([
    0x56, 0xe8, 0x1f, 0x17, 0x1b, 0xcc, 0x55, 0xa6, 0xff, 0x83, 0x45, 0xe6, 0x92, 0xc0, 0xf8, 0x6e,
    0x5b, 0x48, 0xe0, 0x1b, 0x99, 0x6c, 0xad, 0xc0, 0x01, 0x62, 0x2f, 0xb5, 0xe3, 0x63, 0xb4, 0x21,
]);
