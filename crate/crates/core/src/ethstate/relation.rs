use ethnum::U256;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::account::AccountState;
use super::header::{header_hash, HeaderCommitment};
use super::mpt::{verify_mpt_proof, MptError};
use super::quantity;
use crate::amount::Amount;
use crate::hashcodec::{keccak256_concat, rlp, Digest32};
use crate::hexfmt;
use crate::verdict::{fail, finish, Check, Reason, RelationVerdict};

/// Contract-storage key of `mapping(address => uint)` entry `holder` for a
/// mapping declared at `mapping_slot`: `keccak256(pad32(holder) ||
/// pad32(mapping_slot))`.
pub fn storage_slot_key(holder: &[u8; 20], mapping_slot: U256) -> [u8; 32] {
    let mut padded = [0u8; 32];
    padded[12..].copy_from_slice(holder);
    keccak256_concat(&[&padded, &mapping_slot.to_be_bytes()]).0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageProof {
    #[serde(rename = "key_hex", with = "hexfmt::array")]
    pub key: [u8; 32],
    #[serde(rename = "value_hex", with = "quantity::amount")]
    pub value: Amount,
    #[serde(with = "hexfmt::bytes_list")]
    pub proof: Vec<Vec<u8>>,
}

/// Header, account proof and optional storage proofs for one address at
/// one block, as served by the state-proof RPC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountProofBundle {
    #[serde(rename = "block_hash_hex")]
    pub block_hash: Digest32,
    #[serde(rename = "header_rlp_hex", with = "hexfmt::bytes")]
    pub header_rlp: Vec<u8>,
    #[serde(rename = "address_hex", with = "hexfmt::array")]
    pub address: [u8; 20],
    pub account: AccountState,
    #[serde(with = "hexfmt::bytes_list")]
    pub account_proof: Vec<Vec<u8>>,
    #[serde(default)]
    pub storage_proofs: Vec<StorageProof>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error(transparent)]
    Header(#[from] super::header::MalformedHeader),
    #[error("header hashes to {computed}, bundle says {claimed}")]
    BlockHashMismatch { computed: Digest32, claimed: Digest32 },
    #[error("account proof: {0}")]
    AccountProof(MptError),
    #[error("account proof shows the address absent")]
    AccountAbsent,
    #[error("proven account differs from the bundle's account fields")]
    AccountMismatch,
    #[error("storage proof {index}: {reason}")]
    StorageProof { index: usize, reason: String },
}

impl AccountProofBundle {
    /// Checks every claim in the bundle against its own header: header
    /// hash, account proof, and each storage proof's key and value.
    pub fn validate(&self) -> Result<HeaderCommitment, BundleError> {
        let header = header_hash(&self.header_rlp)?;
        if header.block_hash != self.block_hash {
            return Err(BundleError::BlockHashMismatch {
                computed: header.block_hash,
                claimed: self.block_hash,
            });
        }
        match verify_mpt_proof(&header.state_root, &self.address, &self.account_proof) {
            Err(e) => return Err(BundleError::AccountProof(e)),
            Ok(None) => return Err(BundleError::AccountAbsent),
            Ok(Some(v)) if v != self.account.to_rlp() => return Err(BundleError::AccountMismatch),
            Ok(Some(_)) => {}
        }
        for (index, sp) in self.storage_proofs.iter().enumerate() {
            let proven = prove_storage_value(&self.account.storage_root, sp)
                .map_err(|reason| BundleError::StorageProof { index, reason })?;
            if proven != sp.value {
                return Err(BundleError::StorageProof {
                    index,
                    reason: format!("proves {proven}, bundle says {}", sp.value),
                });
            }
        }
        Ok(header)
    }
}

/// Value proven by a storage proof; absence proves zero.
fn prove_storage_value(storage_root: &Digest32, sp: &StorageProof) -> Result<Amount, String> {
    match verify_mpt_proof(storage_root, &sp.key, &sp.proof) {
        Err(e) => Err(e.to_string()),
        Ok(None) => Ok(Amount::ZERO),
        Ok(Some(raw)) => {
            let item = rlp::decode(&raw).map_err(|e| format!("value: {e}"))?;
            let v = item.as_u256().map_err(|e| format!("value: {e}"))?;
            Ok(Amount::new(v))
        }
    }
}

/// Public input of the ether minimum-balance relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EthReserveStatement {
    pub min_amount: Amount,
    pub block_hash: Digest32,
}

/// Public input of the token minimum-balance relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erc20ReserveStatement {
    pub min_amount: Amount,
    pub block_hash: Digest32,
    #[serde(with = "hexfmt::array")]
    pub token_contract: [u8; 20],
    /// Storage slot of the token's balance mapping.
    pub mapping_slot: Amount,
}

/// Private input of the token relation: the contract's account proof with a
/// single storage proof, plus the holder whose balance it proves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erc20Witness {
    pub bundle: AccountProofBundle,
    #[serde(with = "hexfmt::array")]
    pub holder: [u8; 20],
}

/// Steps shared by both relations: bind the header to the public block
/// hash, then walk the account proof from that header's state root and
/// compare the proven value with the encoded witness account.
fn check_account(block_hash: &Digest32, bundle: &AccountProofBundle) -> Check<HeaderCommitment> {
    let header = match header_hash(&bundle.header_rlp) {
        Ok(h) => h,
        Err(e) => return fail(Reason::BadHeader, e.to_string()),
    };
    if header.block_hash != *block_hash {
        return fail(Reason::BadHeader, "header does not hash to the public block hash");
    }
    let proven = match verify_mpt_proof(&header.state_root, &bundle.address, &bundle.account_proof)
    {
        Ok(v) => v,
        Err(e) => return fail(Reason::BadProof, e.to_string()),
    };
    match proven {
        None => fail(Reason::AccountMismatch, "proof shows the account absent"),
        Some(v) if v != bundle.account.to_rlp() => {
            fail(Reason::AccountMismatch, "proven account differs from witness account")
        }
        Some(_) => Ok(header),
    }
}

/// Accepts iff the witness account is proven under the state root of the
/// header hashing to `statement.block_hash` and its balance is at least
/// `statement.min_amount`.
pub fn check_eth_min_balance_relation(
    statement: &EthReserveStatement,
    witness: &AccountProofBundle,
) -> RelationVerdict {
    finish((|| {
        check_account(&statement.block_hash, witness)?;
        if witness.account.balance < statement.min_amount {
            return fail(
                Reason::InsufficientBalance,
                format!("balance {} < minimum {}", witness.account.balance, statement.min_amount),
            );
        }
        Ok(())
    })())
}

/// Accepts iff the token contract's account is proven under the public
/// block, and the contract storage proves a balance of at least
/// `statement.min_amount` for the private holder.
pub fn check_erc20_min_balance_relation(
    statement: &Erc20ReserveStatement,
    witness: &Erc20Witness,
) -> RelationVerdict {
    finish(erc20_checks(statement, witness))
}

fn erc20_checks(statement: &Erc20ReserveStatement, witness: &Erc20Witness) -> Check {
    let bundle = &witness.bundle;
    if bundle.address != statement.token_contract {
        return fail(Reason::AccountMismatch, "account proof is not for the token contract");
    }
    let [sp] = bundle.storage_proofs.as_slice() else {
        return fail(
            Reason::MalformedWitness,
            format!("expected one storage proof, got {}", bundle.storage_proofs.len()),
        );
    };
    check_account(&statement.block_hash, bundle)?;

    let slot = storage_slot_key(&witness.holder, statement.mapping_slot.value());
    if sp.key != slot {
        return fail(Reason::BadStorageProof, "storage key is not the holder's balance slot");
    }
    let proven = match prove_storage_value(&bundle.account.storage_root, sp) {
        Ok(v) => v,
        Err(e) => return fail(Reason::BadStorageProof, e),
    };
    if proven != sp.value {
        return fail(Reason::BadStorageProof, "proven value differs from witness value");
    }
    if proven < statement.min_amount {
        return fail(
            Reason::InsufficientBalance,
            format!("token balance {proven} < minimum {}", statement.min_amount),
        );
    }
    Ok(())
}
