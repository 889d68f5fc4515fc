//! Fetches account/storage proofs and block headers from an Ethereum node,
//! verifies them locally, and records them as offline fixtures.

mod client;
pub mod config;
mod error;
pub mod fixture;
pub mod header;
pub mod types;

pub use client::RpcClient;
pub use config::RpcConfig;
pub use error::RpcError;
pub use fixture::{load_fixture, record_fixture, FixtureResponse, RecordedFixture};
pub use header::{encode_header, validated_header, HEADER_SCHEMA};
pub use types::{BlockId, ProofResponse, StorageProofResponse};
