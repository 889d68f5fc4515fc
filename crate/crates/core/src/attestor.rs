//! Named relations behind a proving-backend seam.
//!
//! Statements travel as canonical bytes (compact JSON in declaration
//! order) and an attestation binds them by digest. The only backend here,
//! `transparent-v1`, carries the witness in the payload and verifies by
//! re-running the relation.

use std::fmt;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::btcstate::{check_btc_reserve_relation, BtcReserveStatement, BtcReserveWitness};
use crate::ethstate::{
    check_erc20_min_balance_relation, check_eth_min_balance_relation, AccountProofBundle,
    Erc20ReserveStatement, Erc20Witness, EthReserveStatement,
};
use crate::hashcodec::{keccak256, Digest32};
use crate::liabilities::{check_liability_relation, LiabilityStatement, LiabilityWitness};
use crate::solvency::{check_solvency_relation, SolvencyStatement, SolvencyWitness};
use crate::verdict::{Reason, RelationVerdict};

pub const TRANSPARENT_BACKEND: &str = "transparent-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationId {
    Liability,
    EthReserve,
    Erc20Reserve,
    BtcReserve,
    Solvency,
}

impl RelationId {
    pub const ALL: [RelationId; 5] = [
        RelationId::Liability,
        RelationId::EthReserve,
        RelationId::Erc20Reserve,
        RelationId::BtcReserve,
        RelationId::Solvency,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationId::Liability => "liability-v1",
            RelationId::EthReserve => "eth-reserve-v1",
            RelationId::Erc20Reserve => "erc20-reserve-v1",
            RelationId::BtcReserve => "btc-reserve-v1",
            RelationId::Solvency => "solvency-v1",
        }
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown relation {0:?}")]
pub struct UnknownRelation(pub String);

impl FromStr for RelationId {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| UnknownRelation(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    /// Kept as text so that attestations naming unknown relations can be
    /// read and rejected with a verdict.
    pub relation: String,
    pub backend: String,
    pub statement_digest_hex: Digest32,
    #[serde(with = "base64_bytes")]
    pub payload_base64: Vec<u8>,
}

mod base64_bytes {
    use super::{Engine, BASE64};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&BASE64.encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        BASE64.decode(s.as_bytes()).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttestError {
    #[error("relation rejected: {0}")]
    RelationRejected(RelationVerdict),
    #[error(transparent)]
    UnknownRelation(#[from] UnknownRelation),
    #[error("unknown backend {0:?}")]
    UnknownBackend(String),
    #[error("parse error: {0}")]
    ParseError(String),
}

/// Canonical statement bytes: compact JSON, fields in declaration order.
pub fn canonical_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("statement types serialize infallibly")
}

pub fn statement_digest(statement: &[u8]) -> Digest32 {
    keccak256(statement)
}

/// Parses statement bytes and insists they are already canonical, so one
/// statement value has exactly one digest.
fn parse_statement<T: Serialize + DeserializeOwned>(bytes: &[u8]) -> Result<T, String> {
    let value: T = serde_json::from_slice(bytes).map_err(|e| format!("statement: {e}"))?;
    if canonical_bytes(&value) != bytes {
        return Err("statement bytes are not canonical".into());
    }
    Ok(value)
}

fn parse_witness<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("witness: {e}"))
}

/// Parses both inputs for `relation` and runs its check. `Err` means the
/// inputs did not parse.
pub fn run_relation(relation: RelationId, statement: &[u8], witness: &[u8]) -> Result<RelationVerdict, String> {
    Ok(match relation {
        RelationId::Liability => check_liability_relation(
            &parse_statement::<LiabilityStatement>(statement)?,
            &parse_witness::<LiabilityWitness>(witness)?,
        ),
        RelationId::EthReserve => check_eth_min_balance_relation(
            &parse_statement::<EthReserveStatement>(statement)?,
            &parse_witness::<AccountProofBundle>(witness)?,
        ),
        RelationId::Erc20Reserve => check_erc20_min_balance_relation(
            &parse_statement::<Erc20ReserveStatement>(statement)?,
            &parse_witness::<Erc20Witness>(witness)?,
        ),
        RelationId::BtcReserve => check_btc_reserve_relation(
            &parse_statement::<BtcReserveStatement>(statement)?,
            &parse_witness::<BtcReserveWitness>(witness)?,
        ),
        RelationId::Solvency => check_solvency_relation(
            &parse_statement::<SolvencyStatement>(statement)?,
            &parse_witness::<SolvencyWitness>(witness)?,
        ),
    })
}

/// A proving system. `prove` is only called on inputs whose relation has
/// accepted; `verify` is only called once the statement digest matched.
pub trait ProvingBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn prove(&self, relation: RelationId, statement: &[u8], witness: &[u8]) -> Vec<u8>;
    fn verify(&self, relation: RelationId, statement: &[u8], payload: &[u8]) -> RelationVerdict;
}

/// Witness-revealing backend: the payload is the witness itself.
#[derive(Debug, Default, Clone, Copy)]
pub struct Transparent;

impl ProvingBackend for Transparent {
    fn name(&self) -> &'static str {
        TRANSPARENT_BACKEND
    }

    fn prove(&self, _relation: RelationId, _statement: &[u8], witness: &[u8]) -> Vec<u8> {
        witness.to_vec()
    }

    fn verify(&self, relation: RelationId, statement: &[u8], payload: &[u8]) -> RelationVerdict {
        run_relation(relation, statement, payload)
            .unwrap_or_else(|e| RelationVerdict::reject(Reason::ParseError, e))
    }
}

pub struct Attestor {
    backends: Vec<Box<dyn ProvingBackend>>,
}

impl Default for Attestor {
    fn default() -> Self {
        Attestor { backends: vec![Box::new(Transparent)] }
    }
}

impl Attestor {
    pub fn with_backends(backends: Vec<Box<dyn ProvingBackend>>) -> Self {
        Attestor { backends }
    }

    fn backend(&self, name: &str) -> Option<&dyn ProvingBackend> {
        self.backends.iter().find(|b| b.name() == name).map(|b| b.as_ref())
    }

    /// Runs the relation and, on acceptance, seals an attestation with the
    /// first registered backend.
    pub fn prove(&self, relation: &str, statement: &[u8], witness: &[u8]) -> Result<Attestation, AttestError> {
        let id: RelationId = relation.parse()?;
        let backend = self
            .backends
            .first()
            .ok_or_else(|| AttestError::UnknownBackend("<none registered>".into()))?;
        let verdict = run_relation(id, statement, witness).map_err(AttestError::ParseError)?;
        if !verdict.accepted {
            return Err(AttestError::RelationRejected(verdict));
        }
        Ok(Attestation {
            relation: id.as_str().to_string(),
            backend: backend.name().to_string(),
            statement_digest_hex: statement_digest(statement),
            payload_base64: backend.prove(id, statement, witness),
        })
    }

    pub fn verify(&self, statement: &[u8], attestation: &Attestation) -> RelationVerdict {
        let id: RelationId = match attestation.relation.parse() {
            Ok(id) => id,
            Err(e) => return RelationVerdict::reject(Reason::UnknownRelation, e.to_string()),
        };
        let Some(backend) = self.backend(&attestation.backend) else {
            return RelationVerdict::reject(
                Reason::UnknownBackend,
                format!("unknown backend {:?}", attestation.backend),
            );
        };
        if statement_digest(statement) != attestation.statement_digest_hex {
            return RelationVerdict::reject(
                Reason::StatementMismatch,
                "statement does not match the attested digest",
            );
        }
        backend.verify(id, statement, &attestation.payload_base64)
    }
}

pub fn prove(relation: &str, statement: &[u8], witness: &[u8]) -> Result<Attestation, AttestError> {
    Attestor::default().prove(relation, statement, witness)
}

pub fn verify(statement: &[u8], attestation: &Attestation) -> RelationVerdict {
    Attestor::default().verify(statement, attestation)
}
