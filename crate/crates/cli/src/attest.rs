use std::path::{Path, PathBuf};

use clap::Args;
use ppos_core::attestor::{self, canonical_bytes, AttestError, Attestation, RelationId};
use serde::Serialize;

use crate::files::{read_bytes, read_json, write_bytes, write_json};
use crate::CliError;

/// Where a proving command leaves its artifacts.
#[derive(Debug, Args)]
pub struct ProofOutput {
    /// Public statement (canonical JSON bytes).
    #[arg(long)]
    pub statement: PathBuf,
    /// Attestation over the statement.
    #[arg(long)]
    pub attestation: PathBuf,
    /// Private witness, needed later by solvency-prove.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

pub fn attest<S: Serialize, W: Serialize>(
    relation: RelationId,
    statement: &S,
    witness: &W,
    out: &ProofOutput,
) -> Result<Attestation, CliError> {
    let st = canonical_bytes(statement);
    let w = canonical_bytes(witness);
    let att = attestor::prove(relation.as_str(), &st, &w).map_err(|e| match e {
        AttestError::RelationRejected(v) => CliError::Rejected(format!("{relation}: {v}")),
        other => CliError::Rejected(format!("{relation}: {other}")),
    })?;
    write_bytes(&out.statement, &st)?;
    write_json(&out.attestation, &att)?;
    if let Some(path) = &out.witness {
        write_json(path, witness)?;
    }
    Ok(att)
}

/// Checks an attestation against the exact bytes of a statement file.
pub fn verify_files(statement: &Path, attestation: &Path) -> Result<serde_json::Value, CliError> {
    let st = read_bytes(statement)?;
    let att: Attestation = read_json(attestation)?;
    let v = attestor::verify(&st, &att);
    if !v.accepted {
        return Err(CliError::Rejected(format!("{}: {v}", att.relation)));
    }
    Ok(serde_json::json!({"accepted": true, "relation": att.relation, "statement_digest": att.statement_digest_hex}))
}
