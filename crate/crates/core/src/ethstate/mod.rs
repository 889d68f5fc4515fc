//! Ethereum account and contract-storage state verification against a
//! block hash, and the ether / token minimum-balance relations.

mod account;
mod header;
pub mod mpt;
pub mod quantity;
mod relation;

pub use account::{decode_account, AccountState, MalformedAccount};
pub use header::{header_hash, HeaderCommitment, MalformedHeader, MIN_HEADER_FIELDS, STATE_ROOT_INDEX};
pub use mpt::{verify_mpt_proof, MptError, MptNode, NodeRef};
pub use relation::{
    check_erc20_min_balance_relation, check_eth_min_balance_relation, storage_slot_key,
    AccountProofBundle, BundleError, Erc20ReserveStatement, Erc20Witness, EthReserveStatement,
    StorageProof,
};
