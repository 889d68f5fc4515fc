use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ppos_core::attestor::Attestation;
use ppos_core::solvency::BtcCommitment;
use ppos_core::{hexfmt, Digest32};
use ppos_registry::{serve, Registry, RegistryClient, RoundRegistry, RoundStatus, Snapshot, Submission};
use serde::Deserialize;
use serde_json::json;

use crate::files::{emit, malformed, read_json, read_text};
use crate::CliError;

pub const ENV_REGISTRY_URL: &str = "PPOS_REGISTRY_URL";

/// `[registry]` table of the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryConfig {
    pub log: Option<PathBuf>,
    pub url: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct ConfigFile {
    #[serde(default)]
    registry: RegistryConfig,
}

pub fn load_config(path: Option<&Path>) -> Result<RegistryConfig, CliError> {
    let Some(path) = path else {
        return Ok(RegistryConfig::default());
    };
    let file: ConfigFile = toml::from_str(&read_text(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(file.registry)
}

// In-process registry backed by a log file, or a served one.
#[derive(Debug, Args)]
pub struct Target {
    /// Event log of an in-process registry.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Base URL of a running registry-serve.
    #[arg(long, env = ENV_REGISTRY_URL, conflicts_with = "log")]
    pub url: Option<String>,
}

const DEFAULT_LOG: &str = "registry.jsonl";

impl Target {
    fn connect(&self, cfg: &RegistryConfig) -> Result<Box<dyn RoundRegistry>, CliError> {
        if let Some(url) = self.url.as_ref().or(if self.log.is_none() { cfg.url.as_ref() } else { None }) {
            return Ok(Box::new(RegistryClient::new(url.clone())));
        }
        let path = self.log.clone().or_else(|| cfg.log.clone()).unwrap_or_else(|| DEFAULT_LOG.into());
        Ok(Box::new(Registry::open(&path)?))
    }
}

fn parse_word(s: &str) -> Result<[u8; 32], String> {
    hexfmt::decode_array(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct OpenArgs {
    #[command(flatten)]
    pub target: Target,
    /// Ethereum block every reserve proof of the round must cite.
    #[arg(long)]
    pub eth_block: Option<Digest32>,
    /// UTXO commitment root (with --btc-block).
    #[arg(long, requires = "btc_block")]
    pub btc_root: Option<Digest32>,
    #[arg(long, value_parser = parse_word, requires = "btc_root")]
    pub btc_block: Option<[u8; 32]>,
}

pub fn open(args: &OpenArgs, cfg: &RegistryConfig) -> Result<(), CliError> {
    let snapshot = Snapshot {
        eth_block_hash: args.eth_block,
        btc: args.btc_root.zip(args.btc_block).map(|(utxo_root, snapshot_block)| BtcCommitment { utxo_root, snapshot_block }),
    };
    let round = args.target.connect(cfg)?.open_round(snapshot)?;
    emit(&round);
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SubmitKind {
    Liabilities,
    Reserve,
}

#[derive(Debug, Args)]
pub struct SubmitArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long)]
    pub round: u64,
    #[arg(long, value_enum)]
    pub kind: SubmitKind,
    #[arg(long)]
    pub statement: PathBuf,
    #[arg(long)]
    pub attestation: PathBuf,
}

fn submission(statement: &Path, attestation: &Path) -> Result<Submission, CliError> {
    let text = read_text(statement)?;
    let att: Attestation = read_json(attestation)?;
    if text.ends_with('\n') {
        return Err(malformed(statement, "statement files hold the exact attested bytes, without a trailing newline"));
    }
    Ok(Submission { statement: text, attestation: att })
}

pub fn submit(args: &SubmitArgs, cfg: &RegistryConfig) -> Result<(), CliError> {
    let sub = submission(&args.statement, &args.attestation)?;
    let mut reg = args.target.connect(cfg)?;
    let round = match args.kind {
        SubmitKind::Liabilities => reg.submit_liabilities(args.round, sub)?,
        SubmitKind::Reserve => reg.submit_reserve(args.round, sub)?,
    };
    emit(&round);
    Ok(())
}

#[derive(Debug, Args)]
pub struct FinalizeArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long)]
    pub round: u64,
    #[arg(long)]
    pub statement: PathBuf,
    #[arg(long)]
    pub attestation: PathBuf,
}

/// A round finalized as insolvent is still printed, but exits 1.
pub fn finalize(args: &FinalizeArgs, cfg: &RegistryConfig) -> Result<(), CliError> {
    let sub = submission(&args.statement, &args.attestation)?;
    let round = args.target.connect(cfg)?.finalize_round(args.round, sub)?;
    emit(&round);
    match round.status {
        RoundStatus::Finalized { accepted: false, reason } => {
            Err(CliError::Rejected(format!("round {} finalized as rejected ({reason})", round.round_id)))
        }
        _ => Ok(()),
    }
}

#[derive(Debug, Args)]
pub struct ShowArgs {
    #[command(flatten)]
    pub target: Target,
    /// One round; all rounds when absent.
    #[arg(long)]
    pub round: Option<u64>,
}

pub fn show(args: &ShowArgs, cfg: &RegistryConfig) -> Result<(), CliError> {
    let reg = args.target.connect(cfg)?;
    match args.round {
        Some(id) => emit(&reg.get_round(id)?),
        None => emit(&reg.list_rounds()?),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8650")]
    pub addr: String,
}

pub fn serve_cmd(args: &ServeArgs, cfg: &RegistryConfig) -> Result<(), CliError> {
    let path = args.log.clone().or_else(|| cfg.log.clone()).unwrap_or_else(|| DEFAULT_LOG.into());
    let handle = serve(Registry::open(&path)?, &args.addr)?;
    emit(&json!({"url": handle.url(), "log": path}));
    eprintln!("serving {} on {}", path.display(), handle.url());
    handle.join();
    Ok(())
}
