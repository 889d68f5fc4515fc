//! `ppos`: build liabilities trees, prove reserves, attest solvency and
//! drive registry rounds. Results go to stdout as JSON, diagnostics to
//! stderr. Exit codes: 0 success, 1 rejected or malformed input, 2 usage,
//! 3 I/O or transport.

mod attest;
mod error;
mod files;
mod pol;
mod registry;
mod reserves;
mod solvency;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ppos", version, about = "Proof-of-solvency pipeline")]
struct Cli {
    /// TOML file with optional [rpc] and [registry] tables.
    #[arg(long, global = true, env = "PPOS_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for salt generation; omit for fresh randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    statement: PathBuf,
    #[arg(long)]
    attestation: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the liabilities tree and attest it.
    PolBuild(pol::BuildArgs),
    /// Export one user's inclusion bundle.
    PolExportUser(pol::ExportArgs),
    /// Check a user's inclusion bundle.
    PolVerifyUser(pol::VerifyUserArgs),
    /// Fetch and record an account proof from a node.
    EthRecord(reserves::RecordArgs),
    /// Attest an ether balance from a recorded fixture.
    EthProve(reserves::EthProveArgs),
    /// Attest a token balance from a recorded fixture.
    Erc20Prove(reserves::Erc20ProveArgs),
    /// Canonicalize a chain-state dump.
    BtcIngest(reserves::IngestArgs),
    /// Print the UTXO commitment of a chain-state dump.
    BtcRoot(reserves::RootArgs),
    /// Attest the outputs of one script.
    BtcProve(reserves::BtcProveArgs),
    /// Sign the round's ownership message.
    SignOwnership(solvency::SignArgs),
    /// Attest solvency from the tree and reserve claims.
    SolvencyProve(solvency::SolvencyArgs),
    /// Check any attestation against its statement file.
    AttestVerify(VerifyArgs),
    /// Open the next round with its chain snapshot.
    RegistryOpen(registry::OpenArgs),
    /// Submit the liabilities or a reserve attestation to a round.
    RegistrySubmit(registry::SubmitArgs),
    /// Close a round with its solvency attestation.
    RegistryFinalize(registry::FinalizeArgs),
    /// Print one round or all rounds.
    RegistryShow(registry::ShowArgs),
    /// Serve a registry over HTTP until killed.
    RegistryServe(registry::ServeArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref();
    let reg_cfg = || registry::load_config(config);
    match &cli.command {
        Command::PolBuild(a) => pol::build(a, cli.seed),
        Command::PolExportUser(a) => pol::export_user(a),
        Command::PolVerifyUser(a) => pol::verify_user(a),
        Command::EthRecord(a) => reserves::record(a, config),
        Command::EthProve(a) => reserves::eth_prove(a),
        Command::Erc20Prove(a) => reserves::erc20_prove(a),
        Command::BtcIngest(a) => reserves::btc_ingest(a),
        Command::BtcRoot(a) => reserves::btc_root(a),
        Command::BtcProve(a) => reserves::btc_prove(a),
        Command::SignOwnership(a) => solvency::sign(a),
        Command::SolvencyProve(a) => solvency::prove(a),
        Command::AttestVerify(a) => attest::verify_files(&a.statement, &a.attestation).map(|v| files::emit(&v)),
        Command::RegistryOpen(a) => registry::open(a, &reg_cfg()?),
        Command::RegistrySubmit(a) => registry::submit(a, &reg_cfg()?),
        Command::RegistryFinalize(a) => registry::finalize(a, &reg_cfg()?),
        Command::RegistryShow(a) => registry::show(a, &reg_cfg()?),
        Command::RegistryServe(a) => registry::serve_cmd(a, &reg_cfg()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ppos: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
