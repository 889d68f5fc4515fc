use std::fmt;

use ppos_core::attestor::{Attestation, Attestor};
use ppos_core::solvency::BtcCommitment;
use ppos_core::{Digest32, Reason, RelationVerdict};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RoundStatus {
    Open,
    LiabilitiesSet,
    Finalized { accepted: bool, reason: Reason },
}

impl RoundStatus {
    /// Position in the only allowed order of states.
    pub fn rank(&self) -> u8 {
        match self {
            RoundStatus::Open => 0,
            RoundStatus::LiabilitiesSet => 1,
            RoundStatus::Finalized { .. } => 2,
        }
    }

    pub fn is_finalized(&self) -> bool {
        matches!(self, RoundStatus::Finalized { .. })
    }
}

impl fmt::Display for RoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundStatus::Open => f.write_str("open"),
            RoundStatus::LiabilitiesSet => f.write_str("liabilities_set"),
            RoundStatus::Finalized { accepted: true, .. } => f.write_str("finalized(accepted)"),
            RoundStatus::Finalized { accepted: false, reason } => write!(f, "finalized(rejected: {reason})"),
        }
    }
}

/// Chain state every attestation of the round must refer to, fixed when
/// the round opens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eth_block_hash: Option<Digest32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub btc: Option<BtcCommitment>,
}

/// An attestation with the statement text it was made over. The
/// attestation holds only the statement digest, so the text travels with
/// it and is kept for later re-verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub statement: String,
    pub attestation: Attestation,
}

impl Submission {
    pub fn new(statement: &[u8], attestation: Attestation) -> Self {
        Submission { statement: String::from_utf8_lossy(statement).into_owned(), attestation }
    }

    pub fn verify(&self, attestor: &Attestor) -> RelationVerdict {
        attestor.verify(self.statement.as_bytes(), &self.attestation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub round_id: u64,
    pub status: RoundStatus,
    pub snapshot: Snapshot,
    pub liabilities_root: Option<Digest32>,
    pub liabilities_sum_leaf_index: Option<u64>,
    pub liability_attestation: Option<Submission>,
    pub reserve_attestations: Vec<Submission>,
    pub solvency_attestation: Option<Submission>,
}

impl Round {
    pub fn new(round_id: u64, snapshot: Snapshot) -> Self {
        Round {
            round_id,
            status: RoundStatus::Open,
            snapshot,
            liabilities_root: None,
            liabilities_sum_leaf_index: None,
            liability_attestation: None,
            reserve_attestations: Vec::new(),
            solvency_attestation: None,
        }
    }
}
