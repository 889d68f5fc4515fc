use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use ethnum::U256;
use ppos_core::attestor::RelationId;
use ppos_core::btcstate::{build_utxo_tree, ingest_chainstate, write_chainstate, UtxoSnapshot};
use ppos_core::ethstate::{storage_slot_key, AccountProofBundle, Erc20ReserveStatement, Erc20Witness, EthReserveStatement};
use ppos_core::{hexfmt, Amount};
use ppos_rpc::{load_fixture, record_fixture, BlockId, RpcClient, RpcConfig};
use serde_json::json;

use crate::attest::{attest, ProofOutput};
use crate::files::{emit, malformed, write_bytes};
use crate::CliError;

fn parse_address(s: &str) -> Result<[u8; 20], String> {
    hexfmt::decode_array(s).map_err(|e| e.to_string())
}

/// Hex bytes as one argument (a bare `Vec<u8>` would read as a list).
#[derive(Debug, Clone)]
pub struct HexBytes(pub Vec<u8>);

impl std::str::FromStr for HexBytes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        hexfmt::decode(s).map(HexBytes).map_err(|e| e.to_string())
    }
}

fn parse_word(s: &str) -> Result<[u8; 32], String> {
    hexfmt::decode_array(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct RecordArgs {
    #[arg(long, value_parser = parse_address)]
    pub address: [u8; 20],
    /// Block number, 0x-prefixed hash, or tag.
    #[arg(long, default_value = "latest")]
    pub block: BlockId,
    /// Raw storage keys to prove.
    #[arg(long = "storage-key", value_parser = parse_word)]
    pub storage_keys: Vec<[u8; 32]>,
    /// Prove this holder's entry of the balance mapping (with --mapping-slot).
    #[arg(long, value_parser = parse_address, requires = "mapping_slot")]
    pub holder: Option<[u8; 20]>,
    #[arg(long)]
    pub mapping_slot: Option<u64>,
    /// Endpoint; overrides the config file and environment.
    #[arg(long)]
    pub rpc_url: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn record(args: &RecordArgs, config: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = RpcConfig::load(config)?;
    if let Some(url) = &args.rpc_url {
        cfg.url = url.clone();
    }
    let mut keys = args.storage_keys.clone();
    if let (Some(holder), Some(slot)) = (args.holder, args.mapping_slot) {
        keys.push(storage_slot_key(&holder, U256::from(slot)));
    }
    let client = RpcClient::new(cfg);
    let (bundle, fixture) = client.fetch_account_proof(&args.address, &keys, &args.block)?;
    record_fixture(&fixture, &args.out)?;
    emit(&json!({
        "fixture": args.out,
        "block_hash": bundle.block_hash,
        "digest": fixture.digest,
        "storage_proofs": bundle.storage_proofs.len(),
    }));
    Ok(())
}

fn load_bundle(path: &Path) -> Result<AccountProofBundle, CliError> {
    Ok(load_fixture(path)?.bundle)
}

#[derive(Debug, Args)]
pub struct EthProveArgs {
    /// Recorded account-proof fixture.
    #[arg(long)]
    pub fixture: PathBuf,
    /// Public minimum; defaults to the proven balance.
    #[arg(long)]
    pub min: Option<Amount>,
    #[command(flatten)]
    pub out: ProofOutput,
}

pub fn eth_prove(args: &EthProveArgs) -> Result<(), CliError> {
    let mut bundle = load_bundle(&args.fixture)?;
    bundle.storage_proofs.clear();
    let statement =
        EthReserveStatement { min_amount: args.min.unwrap_or(bundle.account.balance), block_hash: bundle.block_hash };
    attest(RelationId::EthReserve, &statement, &bundle, &args.out)?;
    emit(&json!({"relation": RelationId::EthReserve.as_str(), "block_hash": statement.block_hash, "min_amount": statement.min_amount}));
    Ok(())
}

#[derive(Debug, Args)]
pub struct Erc20ProveArgs {
    /// Recorded fixture of the token contract with the holder's storage proof.
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long, value_parser = parse_address)]
    pub holder: [u8; 20],
    #[arg(long)]
    pub mapping_slot: u64,
    #[arg(long)]
    pub min: Option<Amount>,
    #[command(flatten)]
    pub out: ProofOutput,
}

pub fn erc20_prove(args: &Erc20ProveArgs) -> Result<(), CliError> {
    let mut bundle = load_bundle(&args.fixture)?;
    let key = storage_slot_key(&args.holder, U256::from(args.mapping_slot));
    bundle.storage_proofs.retain(|sp| sp.key == key);
    let Some(sp) = bundle.storage_proofs.first() else {
        return Err(malformed(&args.fixture, "no storage proof for the holder's balance slot"));
    };
    let statement = Erc20ReserveStatement {
        min_amount: args.min.unwrap_or(sp.value),
        block_hash: bundle.block_hash,
        token_contract: bundle.address,
        mapping_slot: Amount::from_u64(args.mapping_slot),
    };
    let witness = Erc20Witness { bundle, holder: args.holder };
    attest(RelationId::Erc20Reserve, &statement, &witness, &args.out)?;
    emit(&json!({
        "relation": RelationId::Erc20Reserve.as_str(),
        "block_hash": statement.block_hash,
        "min_amount": statement.min_amount,
    }));
    Ok(())
}

fn read_snapshot(path: &Path) -> Result<UtxoSnapshot, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ingest_chainstate(BufReader::new(file)).map_err(|e| malformed(path, e))
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Chain-state dump: block-hash preamble line, then one UTXO per line.
    #[arg(long)]
    pub chainstate: PathBuf,
    /// Canonical (sorted) dump.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn btc_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let snapshot = read_snapshot(&args.chainstate)?;
    let mut buf = Vec::new();
    write_chainstate(&snapshot, &mut buf)?;
    write_bytes(&args.out, &buf)?;
    emit(&json!({"block_hash": hexfmt::encode(snapshot.block_hash), "utxos": snapshot.utxos.len()}));
    Ok(())
}

#[derive(Debug, Args)]
pub struct RootArgs {
    #[arg(long)]
    pub chainstate: PathBuf,
}

pub fn btc_root(args: &RootArgs) -> Result<(), CliError> {
    let snapshot = read_snapshot(&args.chainstate)?;
    let tree = build_utxo_tree(&snapshot).map_err(|e| malformed(&args.chainstate, e))?;
    emit(&json!({
        "utxo_root": tree.root(),
        "snapshot_block": hexfmt::encode(tree.snapshot_block()),
        "utxos": tree.utxo_count(),
        "depth": tree.depth(),
    }));
    Ok(())
}

#[derive(Debug, Args)]
pub struct BtcProveArgs {
    #[arg(long)]
    pub chainstate: PathBuf,
    /// Locking script whose outputs are claimed.
    #[arg(long)]
    pub script: HexBytes,
    /// Public minimum in satoshi; defaults to the script's total.
    #[arg(long)]
    pub min: Option<Amount>,
    #[command(flatten)]
    pub out: ProofOutput,
}

pub fn btc_prove(args: &BtcProveArgs) -> Result<(), CliError> {
    let snapshot = read_snapshot(&args.chainstate)?;
    let tree = build_utxo_tree(&snapshot).map_err(|e| malformed(&args.chainstate, e))?;
    let witness = tree.witness_for_script(&snapshot, &args.script.0);
    if witness.utxos.is_empty() {
        return Err(CliError::Rejected("no outputs with that script in the snapshot".into()));
    }
    let statement = tree.statement(args.min.unwrap_or(witness.total()));
    attest(RelationId::BtcReserve, &statement, &witness, &args.out)?;
    emit(&json!({
        "relation": RelationId::BtcReserve.as_str(),
        "utxo_root": statement.utxo_root,
        "min_amount": statement.min_amount,
        "utxos": witness.utxos.len(),
    }));
    Ok(())
}
