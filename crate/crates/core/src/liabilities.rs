//! Proof-of-liabilities commitment.
//!
//! Every user gets one leaf holding a salted commitment to their id and
//! their balances per asset. One extra leaf, placed right after the last user
//! leaf, carries the per-asset totals. Only the root and the position of the
//! totals leaf are public.
//!
//! Leaf byte layouts (all integers big-endian):
//!
//! ```text
//! user leaf: 0x4c || commitment[32] || count[2] || entry*
//! sum leaf:  0x53 || count[2] || entry*
//! entry:     network_len[1] || network || asset[20] || amount[32]
//! ```
//!
//! Entries are sorted by `(network, asset)` and unique.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{Amount, AmountError};
use crate::hashcodec::{keccak256_concat, Digest32};
use crate::hexfmt;
use crate::merkle::{self, MerkleError, MerklePath, MerkleTree};
use crate::verdict::{fail, finish, Check, Reason, RelationVerdict};

pub const USER_LEAF_TAG: u8 = 0x4c;
pub const SUM_LEAF_TAG: u8 = 0x53;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiabilityError {
    #[error("invalid amount: {0}")]
    InvalidAmount(#[from] AmountError),
    #[error("asset listed twice: {0}")]
    DuplicateAsset(AssetId),
    #[error("invalid asset id: {0}")]
    InvalidAsset(String),
    #[error("user id must not be empty")]
    EmptyUserId,
    #[error("no user leaves")]
    EmptyInput,
    #[error("total for {0} does not fit in 32 bytes")]
    SumOverflow(AssetId),
    #[error("user index {index} out of range ({users} users)")]
    IndexOutOfRange { index: usize, users: usize },
    #[error("malformed leaf: {0}")]
    MalformedLeaf(String),
}

/// `(network, asset)`; the all-zero asset denotes the network's native coin.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssetId {
    pub network: String,
    #[serde(with = "hexfmt::array")]
    pub asset: [u8; 20],
}

impl AssetId {
    pub fn new(network: impl Into<String>, asset: [u8; 20]) -> Result<Self, LiabilityError> {
        let network = network.into();
        if network.is_empty() || network.len() > u8::MAX as usize {
            return Err(LiabilityError::InvalidAsset(format!(
                "network tag must be 1..=255 bytes, got {:?}",
                network
            )));
        }
        Ok(AssetId { network, asset })
    }

    pub fn native(network: impl Into<String>) -> Result<Self, LiabilityError> {
        Self::new(network, [0u8; 20])
    }

    pub fn is_native(&self) -> bool {
        self.asset == [0u8; 20]
    }
}

impl std::fmt::Display for AssetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.network, hexfmt::encode(self.asset))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserLeaf {
    pub user_id_commitment: Digest32,
    pub balances: BTreeMap<AssetId, Amount>,
    pub salt: [u8; 32],
}

impl UserLeaf {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![USER_LEAF_TAG];
        out.extend_from_slice(self.user_id_commitment.as_ref());
        encode_entries(&mut out, &self.balances);
        out
    }

    pub fn record(&self) -> LeafRecord {
        LeafRecord {
            user_id_commitment: self.user_id_commitment,
            entries: entry_records(&self.balances),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SumLeaf {
    pub totals: BTreeMap<AssetId, Amount>,
}

impl SumLeaf {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![SUM_LEAF_TAG];
        encode_entries(&mut out, &self.totals);
        out
    }

    pub fn records(&self) -> Vec<EntryRecord> {
        entry_records(&self.totals)
    }

    pub fn from_records(records: &[EntryRecord]) -> Result<Self, LiabilityError> {
        Ok(SumLeaf { totals: parse_entries(records)? })
    }
}

fn encode_entries(out: &mut Vec<u8>, entries: &BTreeMap<AssetId, Amount>) {
    let count = u16::try_from(entries.len()).expect("at most 65535 assets per leaf");
    out.extend_from_slice(&count.to_be_bytes());
    for (id, amount) in entries {
        out.push(id.network.len() as u8);
        out.extend_from_slice(id.network.as_bytes());
        out.extend_from_slice(&id.asset);
        out.extend_from_slice(&amount.to_be_bytes());
    }
}

/// Decoded form of either leaf kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodedLeaf {
    User { commitment: Digest32, balances: BTreeMap<AssetId, Amount> },
    Sum { totals: BTreeMap<AssetId, Amount> },
}

pub fn decode_leaf(bytes: &[u8]) -> Result<DecodedLeaf, LiabilityError> {
    let bad = |m: &str| LiabilityError::MalformedLeaf(m.to_string());
    let (tag, mut rest) = bytes.split_first().ok_or_else(|| bad("empty"))?;
    let commitment = match *tag {
        USER_LEAF_TAG => {
            let c = rest.get(..32).ok_or_else(|| bad("truncated commitment"))?;
            rest = &rest[32..];
            Some(Digest32::from_slice(c).expect("32 bytes"))
        }
        SUM_LEAF_TAG => None,
        _ => return Err(bad("unknown tag")),
    };
    let count = rest.get(..2).ok_or_else(|| bad("truncated count"))?;
    let count = u16::from_be_bytes([count[0], count[1]]);
    rest = &rest[2..];
    let mut map = BTreeMap::new();
    let mut prev: Option<AssetId> = None;
    for _ in 0..count {
        let (&nlen, r) = rest.split_first().ok_or_else(|| bad("truncated entry"))?;
        let nlen = nlen as usize;
        if r.len() < nlen + 52 {
            return Err(bad("truncated entry"));
        }
        let network = std::str::from_utf8(&r[..nlen]).map_err(|_| bad("network not utf-8"))?;
        let asset: [u8; 20] = r[nlen..nlen + 20].try_into().expect("20 bytes");
        let amount = Amount::from_canonical(&r[nlen + 20..nlen + 52])?;
        let id = AssetId::new(network, asset)?;
        if prev.as_ref().is_some_and(|p| p >= &id) {
            return Err(bad("entries not strictly sorted"));
        }
        prev = Some(id.clone());
        map.insert(id, amount);
        rest = &r[nlen + 52..];
    }
    if !rest.is_empty() {
        return Err(bad("trailing bytes"));
    }
    Ok(match commitment {
        Some(commitment) => DecodedLeaf::User { commitment, balances: map },
        None => DecodedLeaf::Sum { totals: map },
    })
}

pub fn user_id_commitment(user_id: &[u8], salt: &[u8; 32]) -> Digest32 {
    keccak256_concat(&[user_id, salt])
}

pub fn make_user_leaf(
    user_id: &[u8],
    balances: impl IntoIterator<Item = (AssetId, Amount)>,
    salt: [u8; 32],
) -> Result<UserLeaf, LiabilityError> {
    if user_id.is_empty() {
        return Err(LiabilityError::EmptyUserId);
    }
    let mut map = BTreeMap::new();
    for (id, amount) in balances {
        if map.insert(id.clone(), amount).is_some() {
            return Err(LiabilityError::DuplicateAsset(id));
        }
    }
    Ok(UserLeaf {
        user_id_commitment: user_id_commitment(user_id, &salt),
        balances: map,
        salt,
    })
}

/// One line of the liabilities input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserInput {
    pub user_id: String,
    pub balances: Vec<BalanceInput>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceInput {
    pub network: String,
    /// 20-byte asset id as hex; all zeros for the native coin.
    pub asset: String,
    /// Decimal amount in the asset's minimal unit.
    pub amount: String,
}

impl UserInput {
    pub fn to_leaf(&self, salt: [u8; 32]) -> Result<UserLeaf, LiabilityError> {
        let balances = self
            .balances
            .iter()
            .map(|b| {
                let asset = hexfmt::decode_array::<20>(&b.asset)
                    .map_err(|e| LiabilityError::InvalidAsset(e.to_string()))?;
                let amount: Amount = b.amount.parse()?;
                Ok((AssetId::new(b.network.clone(), asset)?, amount))
            })
            .collect::<Result<Vec<_>, LiabilityError>>()?;
        make_user_leaf(self.user_id.as_bytes(), balances, salt)
    }
}

pub fn sum_leaf_for(users: &[UserLeaf]) -> Result<SumLeaf, LiabilityError> {
    let mut totals: BTreeMap<AssetId, Amount> = BTreeMap::new();
    for leaf in users {
        for (id, amount) in &leaf.balances {
            let total = totals.entry(id.clone()).or_default();
            *total = total
                .checked_add(*amount)
                .ok_or_else(|| LiabilityError::SumOverflow(id.clone()))?;
        }
    }
    Ok(SumLeaf { totals })
}

#[derive(Debug, Clone)]
pub struct LiabilityTree {
    tree: MerkleTree,
    user_leaves: Vec<UserLeaf>,
    sum_leaf: SumLeaf,
}

impl LiabilityTree {
    pub fn build(user_leaves: Vec<UserLeaf>) -> Result<Self, LiabilityError> {
        if user_leaves.is_empty() {
            return Err(LiabilityError::EmptyInput);
        }
        let sum_leaf = sum_leaf_for(&user_leaves)?;
        let mut leaves: Vec<Vec<u8>> = user_leaves.iter().map(UserLeaf::to_bytes).collect();
        leaves.push(sum_leaf.to_bytes());
        let tree = MerkleTree::build(&leaves).map_err(|_| LiabilityError::EmptyInput)?;
        Ok(LiabilityTree { tree, user_leaves, sum_leaf })
    }

    pub fn root(&self) -> Digest32 {
        self.tree.root()
    }

    pub fn sum_leaf_index(&self) -> usize {
        self.user_leaves.len()
    }

    pub fn tree(&self) -> &MerkleTree {
        &self.tree
    }

    pub fn user_leaves(&self) -> &[UserLeaf] {
        &self.user_leaves
    }

    pub fn sum_leaf(&self) -> &SumLeaf {
        &self.sum_leaf
    }

    pub fn statement(&self) -> LiabilityStatement {
        LiabilityStatement { root: self.root(), sum_leaf_index: self.sum_leaf_index() as u64 }
    }

    pub fn witness(&self) -> LiabilityWitness {
        LiabilityWitness {
            user_leaves: self.user_leaves.iter().map(UserLeaf::record).collect(),
            sum_leaf: self.sum_leaf.records(),
            levels: self.tree.levels().to_vec(),
        }
    }

    pub fn sum_leaf_path(&self) -> MerklePath {
        self.tree.prove(self.sum_leaf_index()).expect("sum leaf is inside the tree")
    }

    pub fn export_user_proof(&self, user_index: usize) -> Result<UserProofBundle, LiabilityError> {
        let leaf = self.user_leaves.get(user_index).ok_or(LiabilityError::IndexOutOfRange {
            index: user_index,
            users: self.user_leaves.len(),
        })?;
        let path = self.tree.prove(user_index).map_err(|e: MerkleError| {
            LiabilityError::MalformedLeaf(e.to_string())
        })?;
        Ok(UserProofBundle { leaf: leaf.to_bytes(), salt: leaf.salt, path, root: self.root() })
    }
}

/// What a single user needs to check their inclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProofBundle {
    #[serde(with = "hexfmt::bytes")]
    pub leaf: Vec<u8>,
    #[serde(with = "hexfmt::array")]
    pub salt: [u8; 32],
    pub path: MerklePath,
    pub root: Digest32,
}

impl UserProofBundle {
    pub fn verify(&self) -> bool {
        merkle::verify_inclusion(&self.root, &self.leaf, &self.path)
    }

    /// Inclusion plus the check that the leaf commits to `user_id`.
    pub fn verify_for_user(&self, user_id: &[u8]) -> bool {
        if !self.verify() {
            return false;
        }
        match decode_leaf(&self.leaf) {
            Ok(DecodedLeaf::User { commitment, .. }) => {
                commitment == user_id_commitment(user_id, &self.salt)
            }
            _ => false,
        }
    }
}

// ---- relation -------------------------------------------------------------

/// Public input of the liability relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiabilityStatement {
    pub root: Digest32,
    pub sum_leaf_index: u64,
}

/// Serialized leaf entry. Fields stay as raw hex so that malformed encodings
/// reach the relation check instead of failing deserialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub network: String,
    pub asset: String,
    pub amount: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub user_id_commitment: Digest32,
    pub entries: Vec<EntryRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiabilityWitness {
    pub user_leaves: Vec<LeafRecord>,
    pub sum_leaf: Vec<EntryRecord>,
    /// Every tree level, leaves first. May be empty, in which case the tree
    /// is only recomputed.
    #[serde(default)]
    pub levels: Vec<Vec<Digest32>>,
}

fn entry_records(map: &BTreeMap<AssetId, Amount>) -> Vec<EntryRecord> {
    map.iter()
        .map(|(id, amount)| EntryRecord {
            network: id.network.clone(),
            asset: hexfmt::encode(id.asset),
            amount: hexfmt::encode(amount.to_be_bytes()),
        })
        .collect()
}

fn parse_entries(records: &[EntryRecord]) -> Result<BTreeMap<AssetId, Amount>, LiabilityError> {
    let mut map = BTreeMap::new();
    let mut prev: Option<AssetId> = None;
    for r in records {
        let asset = hexfmt::decode_array::<20>(&r.asset)
            .map_err(|e| LiabilityError::InvalidAsset(e.to_string()))?;
        let id = AssetId::new(r.network.clone(), asset)?;
        let raw = hexfmt::decode(&r.amount)
            .map_err(|e| LiabilityError::MalformedLeaf(format!("amount: {e}")))?;
        let amount = Amount::from_canonical(&raw)?;
        if prev.as_ref().is_some_and(|p| p >= &id) {
            return Err(LiabilityError::MalformedLeaf(
                "entries not strictly sorted by (network, asset)".into(),
            ));
        }
        prev = Some(id.clone());
        map.insert(id, amount);
    }
    Ok(map)
}

fn witness_fault(e: LiabilityError) -> RelationVerdict {
    match e {
        LiabilityError::InvalidAmount(a) => RelationVerdict::reject(Reason::InvalidAmount, a.to_string()),
        LiabilityError::SumOverflow(id) => RelationVerdict::reject(Reason::SumOverflow, id.to_string()),
        other => RelationVerdict::reject(Reason::MalformedWitness, other.to_string()),
    }
}

/// Accepts iff the witness leaves rebuild the public root, every amount is
/// a canonical 32-byte unsigned value, the totals leaf equals the per-asset
/// sums, and the totals leaf sits right after the last user leaf.
pub fn check_liability_relation(
    statement: &LiabilityStatement,
    witness: &LiabilityWitness,
) -> RelationVerdict {
    finish(liability_checks(statement, witness))
}

fn liability_checks(statement: &LiabilityStatement, witness: &LiabilityWitness) -> Check {
    let users = witness
        .user_leaves
        .iter()
        .map(|r| {
            Ok(UserLeaf {
                user_id_commitment: r.user_id_commitment,
                balances: parse_entries(&r.entries)?,
                salt: [0u8; 32],
            })
        })
        .collect::<Result<Vec<_>, LiabilityError>>()
        .map_err(witness_fault)?;
    let claimed_sum = SumLeaf::from_records(&witness.sum_leaf).map_err(witness_fault)?;

    if statement.sum_leaf_index != users.len() as u64 {
        return fail(
            Reason::BadSumLeafIndex,
            format!(
                "sum leaf index {} but witness has {} user leaves",
                statement.sum_leaf_index,
                users.len()
            ),
        );
    }
    if users.is_empty() {
        return fail(Reason::MalformedWitness, "no user leaves");
    }

    let computed = sum_leaf_for(&users).map_err(witness_fault)?;
    if computed != claimed_sum {
        let detail = computed
            .totals
            .keys()
            .chain(claimed_sum.totals.keys())
            .find(|id| computed.totals.get(*id) != claimed_sum.totals.get(*id))
            .map(|id| {
                format!(
                    "{id}: leaves sum to {}, sum leaf says {}",
                    computed.totals.get(id).copied().unwrap_or_default(),
                    claimed_sum.totals.get(id).copied().unwrap_or_default()
                )
            })
            .unwrap_or_default();
        return fail(Reason::SumMismatch, detail);
    }

    let mut leaves: Vec<Vec<u8>> = users.iter().map(UserLeaf::to_bytes).collect();
    leaves.push(claimed_sum.to_bytes());
    let tree = MerkleTree::build(&leaves).expect("non-empty");
    if tree.root() != statement.root {
        return fail(Reason::BadRoot, "leaves do not rebuild the public root");
    }
    if !witness.levels.is_empty() && witness.levels.as_slice() != tree.levels() {
        return fail(Reason::BadRoot, "witness tree levels disagree with the leaves");
    }
    Ok(())
}
