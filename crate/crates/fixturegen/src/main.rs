use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Regenerates the pinned fixtures.
#[derive(Parser)]
struct Args {
    /// Fixtures root; source data is read from its `source/` directory.
    #[arg(long, default_value = "fixtures")]
    out: PathBuf,
    /// Seed for the synthetic devnet scenario.
    #[arg(long, default_value_t = ppos_fixturegen::DEFAULT_SEED)]
    seed: u64,
    /// Timestamp stored in `recorded_at` (not covered by fixture digests).
    #[arg(long)]
    recorded_at: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let recorded_at = args.recorded_at.unwrap_or_else(ppos_rpc::fixture::now_unix);
    match ppos_fixturegen::write_all(&args.out, args.seed, recorded_at) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fixturegen: {e}");
            ExitCode::FAILURE
        }
    }
}
