use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ppos_core::attestor::RelationId;
use ppos_core::btcstate::{BtcReserveStatement, BtcReserveWitness};
use ppos_core::ethstate::{AccountProofBundle, Erc20ReserveStatement, Erc20Witness, EthReserveStatement};
use ppos_core::liabilities::AssetId;
use ppos_core::solvency::{
    ownership_message, sign_ownership, BtcCommitment, OwnershipSignature, ReserveClaim, ReserveProof,
    SignatureScheme, SolvencyStatement, SolvencyWitness,
};
use ppos_core::{hexfmt, Digest32};
use serde::Deserialize;
use serde_json::json;

use crate::attest::{attest, ProofOutput};
use crate::files::{emit, malformed, read_json, read_text, write_json};
use crate::pol::TreeFile;
use crate::CliError;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scheme {
    /// keccak256 digest, Ethereum address owner
    Eth,
    /// double SHA-256 digest, pay-to-public-key-hash owner
    Btc,
}

impl From<Scheme> for SignatureScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Eth => SignatureScheme::EthKeccak,
            Scheme::Btc => SignatureScheme::BtcSha256d,
        }
    }
}

#[derive(Debug, Args)]
pub struct SignArgs {
    /// File holding the 32-byte secret key as hex.
    #[arg(long)]
    pub secret_file: PathBuf,
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    #[arg(long)]
    pub round: u64,
    /// Liabilities root of the round.
    #[arg(long)]
    pub root: Digest32,
    /// Network tag of the asset whose reserves the key backs.
    #[arg(long)]
    pub network: String,
    /// Signature file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sign(args: &SignArgs) -> Result<(), CliError> {
    let secret: [u8; 32] =
        hexfmt::decode_array(read_text(&args.secret_file)?.trim()).map_err(|e| malformed(&args.secret_file, e))?;
    if args.network.len() > 255 {
        return Err(CliError::Usage("network tag longer than 255 bytes".into()));
    }
    let message = ownership_message(args.round, &args.root, &args.network);
    let sig = sign_ownership(&secret, args.scheme.into(), &message).map_err(|e| malformed(&args.secret_file, e))?;
    match &args.out {
        Some(path) => {
            write_json(path, &sig)?;
            emit(&json!({"signature": path, "scheme": sig.scheme, "round_id": args.round}));
        }
        None => emit(&sig),
    }
    Ok(())
}

/// One reserve claim: the inner proof's files and the owner's signature.
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimEntry {
    pub kind: ClaimKind,
    pub network: String,
    pub statement: PathBuf,
    pub witness: PathBuf,
    pub signature: PathBuf,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    Eth,
    Erc20,
    Btc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimsManifest {
    pub claims: Vec<ClaimEntry>,
}

fn load_claim(dir: &Path, entry: &ClaimEntry) -> Result<ReserveClaim, CliError> {
    let st = dir.join(&entry.statement);
    let w = dir.join(&entry.witness);
    let asset_err = |e| CliError::Usage(format!("network {:?}: {e}", entry.network));
    let (asset, proof) = match entry.kind {
        ClaimKind::Eth => {
            let statement: EthReserveStatement = read_json(&st)?;
            let witness: AccountProofBundle = read_json(&w)?;
            (AssetId::native(entry.network.clone()).map_err(asset_err)?, ReserveProof::Eth { statement, witness })
        }
        ClaimKind::Erc20 => {
            let statement: Erc20ReserveStatement = read_json(&st)?;
            let witness: Erc20Witness = read_json(&w)?;
            let asset = AssetId::new(entry.network.clone(), statement.token_contract).map_err(asset_err)?;
            (asset, ReserveProof::Erc20 { statement, witness })
        }
        ClaimKind::Btc => {
            let statement: BtcReserveStatement = read_json(&st)?;
            let witness: BtcReserveWitness = read_json(&w)?;
            (AssetId::native(entry.network.clone()).map_err(asset_err)?, ReserveProof::Btc { statement, witness })
        }
    };
    let amount = match &proof {
        ReserveProof::Eth { statement, .. } => statement.min_amount,
        ReserveProof::Erc20 { statement, .. } => statement.min_amount,
        ReserveProof::Btc { statement, .. } => statement.min_amount,
    };
    let ownership: OwnershipSignature = read_json(&dir.join(&entry.signature))?;
    Ok(ReserveClaim { asset, amount, proof, ownership })
}

/// Chain commitments shared by all claims; claims citing two different
/// blocks of one chain are refused before proving.
fn commitments(claims: &[ReserveClaim]) -> Result<(Option<Digest32>, Option<BtcCommitment>), CliError> {
    let mut eth = None;
    let mut btc = None;
    for c in claims {
        match &c.proof {
            ReserveProof::Eth { statement: EthReserveStatement { block_hash, .. }, .. }
            | ReserveProof::Erc20 { statement: Erc20ReserveStatement { block_hash, .. }, .. } => {
                if eth.is_some_and(|h| h != *block_hash) {
                    return Err(CliError::Rejected("claims cite different Ethereum blocks".into()));
                }
                eth = Some(*block_hash);
            }
            ReserveProof::Btc { statement, .. } => {
                let this = BtcCommitment { utxo_root: statement.utxo_root, snapshot_block: statement.snapshot_block };
                if btc.as_ref().is_some_and(|b| *b != this) {
                    return Err(CliError::Rejected("claims cite different UTXO snapshots".into()));
                }
                btc = Some(this);
            }
        }
    }
    Ok((eth, btc))
}

#[derive(Debug, Args)]
pub struct SolvencyArgs {
    /// Private tree file from pol-build.
    #[arg(long)]
    pub tree: PathBuf,
    /// JSON manifest listing the reserve claims.
    #[arg(long)]
    pub claims: PathBuf,
    #[arg(long)]
    pub round: u64,
    #[command(flatten)]
    pub out: ProofOutput,
}

pub fn prove(args: &SolvencyArgs) -> Result<(), CliError> {
    let (_, tree) = TreeFile::load(&args.tree)?;
    let manifest: ClaimsManifest = read_json(&args.claims)?;
    let dir = args.claims.parent().unwrap_or(Path::new("."));
    let claims = manifest.claims.iter().map(|e| load_claim(dir, e)).collect::<Result<Vec<_>, _>>()?;
    let (eth_block_hash, btc) = commitments(&claims)?;
    let statement = SolvencyStatement {
        round_id: args.round,
        liabilities_root: tree.root(),
        liabilities_sum_leaf_index: tree.sum_leaf_index() as u64,
        eth_block_hash,
        btc,
    };
    let witness = SolvencyWitness::from_tree(&tree, claims);
    attest(RelationId::Solvency, &statement, &witness, &args.out)?;
    emit(&json!({"relation": RelationId::Solvency.as_str(), "round_id": args.round, "liabilities_root": statement.liabilities_root}));
    Ok(())
}
