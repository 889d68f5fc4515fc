use std::fmt;

use serde::{Deserialize, Serialize};

/// Reason codes shared by every relation and the attestor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    #[serde(rename = "ok")]
    Ok,
    // shared
    MalformedWitness,
    InvalidAmount,
    InsufficientBalance,
    // liabilities
    BadRoot,
    BadSumLeafIndex,
    SumMismatch,
    SumOverflow,
    // ethereum
    BadHeader,
    BadProof,
    AccountMismatch,
    BadStorageProof,
    // bitcoin
    BadPath,
    MixedScripts,
    DuplicateLeaf,
    // solvency
    BadSumLeafPath,
    InnerRelationFailed,
    BadOwnership,
    AssetShortfall,
    DuplicateClaim,
    // attestor
    StatementMismatch,
    UnknownRelation,
    UnknownBackend,
    ParseError,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::MalformedWitness => "MalformedWitness",
            Reason::InvalidAmount => "InvalidAmount",
            Reason::InsufficientBalance => "InsufficientBalance",
            Reason::BadRoot => "BadRoot",
            Reason::BadSumLeafIndex => "BadSumLeafIndex",
            Reason::SumMismatch => "SumMismatch",
            Reason::SumOverflow => "SumOverflow",
            Reason::BadHeader => "BadHeader",
            Reason::BadProof => "BadProof",
            Reason::AccountMismatch => "AccountMismatch",
            Reason::BadStorageProof => "BadStorageProof",
            Reason::BadPath => "BadPath",
            Reason::MixedScripts => "MixedScripts",
            Reason::DuplicateLeaf => "DuplicateLeaf",
            Reason::BadSumLeafPath => "BadSumLeafPath",
            Reason::InnerRelationFailed => "InnerRelationFailed",
            Reason::BadOwnership => "BadOwnership",
            Reason::AssetShortfall => "AssetShortfall",
            Reason::DuplicateClaim => "DuplicateClaim",
            Reason::StatementMismatch => "StatementMismatch",
            Reason::UnknownRelation => "UnknownRelation",
            Reason::UnknownBackend => "UnknownBackend",
            Reason::ParseError => "ParseError",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of checking a relation. `accepted` holds exactly when the reason
/// is [`Reason::Ok`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub accepted: bool,
    pub reason: Reason,
    pub detail: String,
}

impl RelationVerdict {
    pub fn accept() -> Self {
        RelationVerdict { accepted: true, reason: Reason::Ok, detail: String::new() }
    }

    pub fn reject(reason: Reason, detail: impl Into<String>) -> Self {
        debug_assert_ne!(reason, Reason::Ok);
        RelationVerdict { accepted: false, reason, detail: detail.into() }
    }

    pub fn is_accepted(&self) -> bool {
        self.accepted
    }
}

impl fmt::Display for RelationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.accepted {
            f.write_str("accepted")
        } else if self.detail.is_empty() {
            write!(f, "rejected ({})", self.reason)
        } else {
            write!(f, "rejected ({}): {}", self.reason, self.detail)
        }
    }
}

/// Early-return helper for relation checks written as a sequence of
/// `Result<_, RelationVerdict>` steps.
pub(crate) type Check<T = ()> = Result<T, RelationVerdict>;

pub(crate) fn fail<T>(reason: Reason, detail: impl Into<String>) -> Check<T> {
    Err(RelationVerdict::reject(reason, detail))
}

pub(crate) fn finish(result: Check) -> RelationVerdict {
    match result {
        Ok(()) => RelationVerdict::accept(),
        Err(v) => v,
    }
}
