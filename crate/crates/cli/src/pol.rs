use std::path::{Path, PathBuf};

use clap::Args;
use ppos_core::attestor::RelationId;
use ppos_core::liabilities::{decode_leaf, DecodedLeaf, LiabilityTree, UserInput, UserProofBundle};
use ppos_core::{hexfmt, Digest32};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::attest::{attest, ProofOutput};
use crate::files::{emit, malformed, read_json, read_jsonl, write_json};
use crate::CliError;

/// The operator's private copy of a built tree: every user with the salt
/// drawn for them. Enough to rebuild the tree and export any user's proof.
#[derive(Debug, Serialize, Deserialize)]
pub struct TreeFile {
    pub root: Digest32,
    pub sum_leaf_index: u64,
    pub users: Vec<SaltedUser>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SaltedUser {
    #[serde(flatten)]
    pub input: UserInput,
    #[serde(with = "hexfmt::array")]
    pub salt: [u8; 32],
}

impl TreeFile {
    pub fn load(path: &Path) -> Result<(TreeFile, LiabilityTree), CliError> {
        let file: TreeFile = read_json(path)?;
        let leaves = file
            .users
            .iter()
            .map(|u| u.input.to_leaf(u.salt).map_err(|e| malformed(path, format!("{}: {e}", u.input.user_id))))
            .collect::<Result<Vec<_>, _>>()?;
        let tree = LiabilityTree::build(leaves).map_err(|e| malformed(path, e))?;
        if tree.root() != file.root || tree.sum_leaf_index() as u64 != file.sum_leaf_index {
            return Err(malformed(path, "users do not rebuild the recorded root"));
        }
        Ok((file, tree))
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Users, one JSON object per line.
    #[arg(long)]
    pub users: PathBuf,
    /// Private tree file (users and salts).
    #[arg(long)]
    pub tree: PathBuf,
    #[command(flatten)]
    pub out: ProofOutput,
}

pub fn build(args: &BuildArgs, seed: Option<u64>) -> Result<(), CliError> {
    let users: Vec<UserInput> = read_jsonl(&args.users)?;
    if users.is_empty() {
        return Err(malformed(&args.users, "no users"));
    }
    let mut rng: Box<dyn RngCore> = match seed {
        Some(s) => Box::new(ChaCha20Rng::seed_from_u64(s)),
        None => Box::new(ChaCha20Rng::from_entropy()),
    };
    let salted: Vec<SaltedUser> = users.into_iter().map(|input| SaltedUser { input, salt: rng.gen() }).collect();
    let leaves = salted
        .iter()
        .map(|u| u.input.to_leaf(u.salt).map_err(|e| malformed(&args.users, format!("{}: {e}", u.input.user_id))))
        .collect::<Result<Vec<_>, _>>()?;
    let tree = LiabilityTree::build(leaves).map_err(|e| malformed(&args.users, e))?;
    let file = TreeFile { root: tree.root(), sum_leaf_index: tree.sum_leaf_index() as u64, users: salted };
    write_json(&args.tree, &file)?;
    attest(RelationId::Liability, &tree.statement(), &tree.witness(), &args.out)?;
    emit(&json!({"root": file.root, "sum_leaf_index": file.sum_leaf_index, "users": file.users.len()}));
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub user: String,
    /// Bundle file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn export_user(args: &ExportArgs) -> Result<(), CliError> {
    let (file, tree) = TreeFile::load(&args.tree)?;
    let index = file
        .users
        .iter()
        .position(|u| u.input.user_id == args.user)
        .ok_or_else(|| CliError::Usage(format!("no user {:?} in {}", args.user, args.tree.display())))?;
    let bundle = tree.export_user_proof(index).map_err(|e| CliError::Rejected(e.to_string()))?;
    match &args.out {
        Some(path) => {
            write_json(path, &bundle)?;
            emit(&json!({"user": args.user, "root": bundle.root, "leaf_index": index}));
        }
        None => emit(&bundle),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct VerifyUserArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub user: String,
    /// Published root the bundle must lead to.
    #[arg(long)]
    pub root: Option<Digest32>,
}

pub fn verify_user(args: &VerifyUserArgs) -> Result<(), CliError> {
    let bundle: UserProofBundle = read_json(&args.bundle)?;
    if let Some(root) = args.root {
        if bundle.root != root {
            return Err(CliError::Rejected(format!("bundle is for root {}, not {root}", bundle.root)));
        }
    }
    if !bundle.verify() {
        return Err(CliError::Rejected("inclusion path does not lead to the root".into()));
    }
    if !bundle.verify_for_user(args.user.as_bytes()) {
        return Err(CliError::Rejected(format!("leaf does not commit to user {:?}", args.user)));
    }
    let balances = match decode_leaf(&bundle.leaf) {
        Ok(DecodedLeaf::User { balances, .. }) => balances,
        _ => return Err(CliError::Rejected("leaf is not a user leaf".into())),
    };
    let balances: Vec<_> = balances
        .iter()
        .map(|(id, amount)| json!({"network": id.network, "asset": hexfmt::encode(id.asset), "amount": amount}))
        .collect();
    emit(&json!({"accepted": true, "root": bundle.root, "balances": balances}));
    Ok(())
}
