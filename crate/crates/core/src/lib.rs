//! Private proof-of-solvency toolkit.
//!
//! A custodian commits to its liabilities with a sum-bearing Merkle tree,
//! proves reserves against Ethereum state roots and a Bitcoin UTXO-set
//! commitment, and combines both into a per-asset solvency relation. Each
//! relation is a plain predicate over a public statement and a private
//! witness; [`attestor`] wraps them behind a proving-backend seam.

pub mod amount;
pub mod attestor;
pub mod btcstate;
pub mod ethstate;
pub mod hashcodec;
pub mod hexfmt;
pub mod liabilities;
pub mod merkle;
pub mod solvency;
pub mod verdict;

pub use amount::Amount;
pub use hashcodec::{keccak256, sha256d, Digest32, RlpItem};
pub use verdict::{Reason, RelationVerdict};
