use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ownership::{ownership_message, verify_ownership, OwnershipSignature, Owner, SignatureScheme};
use crate::amount::Amount;
use crate::btcstate::{check_btc_reserve_relation, BtcReserveStatement, BtcReserveWitness};
use crate::ethstate::{
    check_erc20_min_balance_relation, check_eth_min_balance_relation, AccountProofBundle,
    Erc20ReserveStatement, Erc20Witness, EthReserveStatement,
};
use crate::hashcodec::Digest32;
use crate::hexfmt;
use crate::liabilities::{AssetId, EntryRecord, LiabilityError, LiabilityTree, SumLeaf};
use crate::merkle::{self, MerklePath};
use crate::verdict::{fail, finish, Check, Reason, RelationVerdict};

/// Public input: only the round, the liabilities commitment and the chain
/// commitments. Balances, addresses and scripts stay in the witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolvencyStatement {
    pub round_id: u64,
    pub liabilities_root: Digest32,
    pub liabilities_sum_leaf_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eth_block_hash: Option<Digest32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub btc: Option<BtcCommitment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BtcCommitment {
    pub utxo_root: Digest32,
    #[serde(with = "hexfmt::array")]
    pub snapshot_block: [u8; 32],
}

/// Inner relation instance backing one reserve claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReserveProof {
    Eth { statement: EthReserveStatement, witness: AccountProofBundle },
    Erc20 { statement: Erc20ReserveStatement, witness: Erc20Witness },
    Btc { statement: BtcReserveStatement, witness: BtcReserveWitness },
}

impl ReserveProof {
    fn min_amount(&self) -> Amount {
        match self {
            ReserveProof::Eth { statement, .. } => statement.min_amount,
            ReserveProof::Erc20 { statement, .. } => statement.min_amount,
            ReserveProof::Btc { statement, .. } => statement.min_amount,
        }
    }

    /// Address or script whose balance the inner relation proves.
    pub fn owner(&self) -> Owner {
        match self {
            ReserveProof::Eth { witness, .. } => Owner::EthAddress(witness.address),
            ReserveProof::Erc20 { witness, .. } => Owner::EthAddress(witness.holder),
            ReserveProof::Btc { witness, .. } => Owner::Script(witness.script_template.clone()),
        }
    }

    pub fn scheme(&self) -> SignatureScheme {
        match self {
            ReserveProof::Btc { .. } => SignatureScheme::BtcSha256d,
            _ => SignatureScheme::EthKeccak,
        }
    }

    fn check_inner(&self) -> RelationVerdict {
        match self {
            ReserveProof::Eth { statement, witness } => check_eth_min_balance_relation(statement, witness),
            ReserveProof::Erc20 { statement, witness } => {
                check_erc20_min_balance_relation(statement, witness)
            }
            ReserveProof::Btc { statement, witness } => check_btc_reserve_relation(statement, witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReserveClaim {
    pub asset: AssetId,
    pub amount: Amount,
    pub proof: ReserveProof,
    pub ownership: OwnershipSignature,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolvencyWitness {
    pub sum_leaf: Vec<EntryRecord>,
    pub sum_leaf_path: MerklePath,
    pub claims: Vec<ReserveClaim>,
}

impl SolvencyWitness {
    /// Sum-leaf part taken from a built liabilities tree.
    pub fn from_tree(tree: &LiabilityTree, claims: Vec<ReserveClaim>) -> Self {
        SolvencyWitness { sum_leaf: tree.sum_leaf().records(), sum_leaf_path: tree.sum_leaf_path(), claims }
    }
}

/// Message a reserve owner signs for one asset network in one round.
pub fn claim_message(statement: &SolvencyStatement, asset: &AssetId) -> Vec<u8> {
    ownership_message(statement.round_id, &statement.liabilities_root, &asset.network)
}

/// Accepts iff the totals leaf is included in the liabilities root at the
/// public index, every claim's inner relation accepts with the claimed
/// amount under the public chain commitments, every claimed address or
/// script signed the round message, and for every asset the claimed
/// reserves cover the liabilities total.
pub fn check_solvency_relation(
    statement: &SolvencyStatement,
    witness: &SolvencyWitness,
) -> RelationVerdict {
    finish(solvency_checks(statement, witness))
}

fn solvency_checks(statement: &SolvencyStatement, witness: &SolvencyWitness) -> Check {
    let sum_leaf = SumLeaf::from_records(&witness.sum_leaf).map_err(|e| match e {
        LiabilityError::InvalidAmount(a) => RelationVerdict::reject(Reason::InvalidAmount, format!("sum leaf: {a}")),
        e => RelationVerdict::reject(Reason::MalformedWitness, format!("sum leaf: {e}")),
    })?;
    if witness.sum_leaf_path.leaf_index != statement.liabilities_sum_leaf_index {
        return fail(Reason::BadSumLeafPath, "path is not for the public sum leaf index");
    }
    if !merkle::verify_inclusion(&statement.liabilities_root, &sum_leaf.to_bytes(), &witness.sum_leaf_path) {
        return fail(Reason::BadSumLeafPath, "sum leaf is not included under the liabilities root");
    }

    for (i, claim) in witness.claims.iter().enumerate() {
        check_binding(statement, claim).map_err(|d| {
            RelationVerdict::reject(Reason::InnerRelationFailed, format!("claim {i}: {d}"))
        })?;
        let inner = claim.proof.check_inner();
        if !inner.accepted {
            return fail(Reason::InnerRelationFailed, format!("claim {i}: {inner}"));
        }
    }

    let mut seen = HashSet::new();
    for (i, claim) in witness.claims.iter().enumerate() {
        let owner = claim.proof.owner();
        let scheme = claim.proof.scheme();
        if claim.ownership.scheme != scheme {
            return fail(Reason::BadOwnership, format!("claim {i}: wrong signature scheme"));
        }
        if !verify_ownership(&owner, &claim.ownership, &claim_message(statement, &claim.asset)) {
            return fail(Reason::BadOwnership, format!("claim {i}: signature does not match owner"));
        }
        if !seen.insert((owner_key(&owner), claim.asset.clone())) {
            return fail(Reason::DuplicateClaim, format!("claim {i}: owner already claimed for {}", claim.asset));
        }
    }

    let mut reserves: BTreeMap<&AssetId, Amount> = BTreeMap::new();
    for claim in &witness.claims {
        let slot = reserves.entry(&claim.asset).or_insert(Amount::ZERO);
        *slot = slot
            .checked_add(claim.amount)
            .ok_or_else(|| RelationVerdict::reject(Reason::SumOverflow, claim.asset.to_string()))?;
    }
    for (asset, owed) in &sum_leaf.totals {
        let held = reserves.get(asset).copied().unwrap_or(Amount::ZERO);
        if held < *owed {
            return fail(Reason::AssetShortfall, format!("{asset}: reserves {held} < liabilities {owed}"));
        }
    }
    Ok(())
}

fn owner_key(owner: &Owner) -> Vec<u8> {
    match owner {
        Owner::EthAddress(a) => [&[0u8][..], a].concat(),
        Owner::Script(s) => [&[1u8][..], s].concat(),
    }
}

/// Claim-level consistency: amount equals the inner minimum, the inner
/// statement commits to the public chain state, and the asset matches the
/// proof kind.
fn check_binding(statement: &SolvencyStatement, claim: &ReserveClaim) -> Result<(), String> {
    if claim.proof.min_amount() != claim.amount {
        return Err("claimed amount differs from the inner minimum".into());
    }
    match &claim.proof {
        ReserveProof::Eth { statement: inner, .. } => {
            if statement.eth_block_hash != Some(inner.block_hash) {
                return Err("inner block hash is not the public block hash".into());
            }
            if !claim.asset.is_native() {
                return Err("ether proof for a token asset".into());
            }
        }
        ReserveProof::Erc20 { statement: inner, .. } => {
            if statement.eth_block_hash != Some(inner.block_hash) {
                return Err("inner block hash is not the public block hash".into());
            }
            if claim.asset.asset != inner.token_contract {
                return Err("token proof for a different contract".into());
            }
        }
        ReserveProof::Btc { statement: inner, .. } => {
            let public = statement.btc.as_ref().ok_or("no public bitcoin commitment")?;
            if public.utxo_root != inner.utxo_root || public.snapshot_block != inner.snapshot_block {
                return Err("inner utxo commitment is not the public one".into());
            }
            if !claim.asset.is_native() {
                return Err("bitcoin proof for a non-native asset".into());
            }
        }
    }
    Ok(())
}
