//! Synthetic end-to-end scenario: custodian keys, a post-upgrade block
//! with ether and token reserves, a bitcoin UTXO snapshot, and a user
//! population whose liabilities match the reserves exactly.

use std::collections::BTreeMap;

use ppos_core::btcstate::{build_utxo_tree, ingest_records, Utxo, UtxoSnapshot};
use ppos_core::ethstate::storage_slot_key;
use ppos_core::hashcodec::{keccak256, sha256, sha256d, EMPTY_TRIE_ROOT};
use ppos_core::liabilities::{BalanceInput, UserInput};
use ppos_core::solvency::{owner_of, Owner, SignatureScheme};
use ppos_core::{hexfmt, Amount, Digest32};
use ppos_rpc::{encode_header, FixtureResponse, RecordedFixture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::state::{build_state, AccountSpec};
use crate::GenError;

pub const ETH_NETWORK: &str = "ethereum";
pub const BTC_NETWORK: &str = "bitcoin";
pub const TOKEN_MAPPING_SLOT: u64 = 0;
const TOKEN_SUPPLY_SLOT: u64 = 2;
pub const NOTE: &str = "synthetic devnet block; not a mainnet recording";

const ETH_BALANCES: [u128; 2] = [1_234_567_890_000_000_000_000, 987_654_321_000_000_000_001];
const TOKEN_BALANCE: u128 = 2_500_000_123_456;
const BTC_UTXOS: [&[u64]; 2] = [&[50_000_000, 125_000_000, 7_654_321], &[210_000_000, 1]];
const USER_COUNT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EthCustodian {
    #[serde(with = "hexfmt::array")]
    pub secret: [u8; 32],
    #[serde(with = "hexfmt::array")]
    pub address: [u8; 20],
    /// Path of the account-proof fixture, relative to the fixtures root.
    pub fixture: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenHolding {
    #[serde(with = "hexfmt::array")]
    pub contract: [u8; 20],
    pub mapping_slot: u64,
    #[serde(with = "hexfmt::array")]
    pub holder_secret: [u8; 32],
    #[serde(with = "hexfmt::array")]
    pub holder: [u8; 20],
    pub fixture: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BtcCustodian {
    #[serde(with = "hexfmt::array")]
    pub secret: [u8; 32],
    #[serde(with = "hexfmt::bytes")]
    pub script: Vec<u8>,
}

/// Everything a test needs to drive the scenario. The secrets are test
/// keys derived from fixed strings and hold nothing on any real network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DevnetKeys {
    pub note: String,
    pub eth_network: String,
    pub btc_network: String,
    pub block_hash: Digest32,
    pub block_fixture: String,
    pub eth_custodians: Vec<EthCustodian>,
    pub token: TokenHolding,
    pub btc_custodians: Vec<BtcCustodian>,
    pub utxo_root: Digest32,
    pub chainstate: String,
    pub users: String,
}

pub struct Devnet {
    pub keys: DevnetKeys,
    pub block: Value,
    pub eth_fixtures: Vec<RecordedFixture>,
    pub erc20_fixture: RecordedFixture,
    pub snapshot: UtxoSnapshot,
    pub users: Vec<UserInput>,
}

fn test_secret(label: &str) -> [u8; 32] {
    keccak256(format!("ppos devnet {label}")).0
}

fn eth_owner(secret: &[u8; 32]) -> Result<[u8; 20], GenError> {
    match owner_of(secret, SignatureScheme::EthKeccak).map_err(|e| GenError::Check(e.to_string()))? {
        Owner::EthAddress(a) => Ok(a),
        Owner::Script(_) => unreachable!("EthKeccak owners are addresses"),
    }
}

fn btc_owner(secret: &[u8; 32]) -> Result<Vec<u8>, GenError> {
    match owner_of(secret, SignatureScheme::BtcSha256d).map_err(|e| GenError::Check(e.to_string()))? {
        Owner::Script(s) => Ok(s),
        Owner::EthAddress(_) => unreachable!("BtcSha256d owners are scripts"),
    }
}

fn random_array<const N: usize>(rng: &mut ChaCha20Rng) -> [u8; N] {
    let mut out = [0u8; N];
    rng.fill(&mut out[..]);
    out
}

/// Splits `total` into `parts` non-negative amounts that sum to it.
fn split(rng: &mut ChaCha20Rng, total: u128, parts: usize) -> Vec<u128> {
    let mut cuts: Vec<u128> = (1..parts).map(|_| rng.gen_range(0..=total)).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

fn block_json(rng: &mut ChaCha20Rng, state_root: Digest32) -> Result<Value, GenError> {
    let mut block = json!({
        "parentHash": Digest32(random_array(rng)).to_hex(),
        "sha3Uncles": keccak256([0xc0]).to_hex(),
        "miner": hexfmt::encode(random_array::<20>(rng)),
        "stateRoot": state_root.to_hex(),
        "transactionsRoot": EMPTY_TRIE_ROOT.to_hex(),
        "receiptsRoot": EMPTY_TRIE_ROOT.to_hex(),
        "logsBloom": hexfmt::encode([0u8; 256]),
        "difficulty": "0x0",
        "number": "0x1500000",
        "gasLimit": "0x2255100",
        "gasUsed": "0x0",
        "timestamp": "0x68f3c1b0",
        "extraData": hexfmt::encode(b"ppos-devnet"),
        "mixHash": Digest32(random_array(rng)).to_hex(),
        "nonce": "0x0000000000000000",
        "baseFeePerGas": "0x3b9aca07",
        "withdrawalsRoot": EMPTY_TRIE_ROOT.to_hex(),
        "blobGasUsed": "0x0",
        "excessBlobGas": "0x0",
        "parentBeaconBlockRoot": Digest32(random_array(rng)).to_hex(),
        "requestsHash": hexfmt::encode(sha256([])),
    });
    let hash = keccak256(encode_header(&block)?);
    block["hash"] = json!(hash.to_hex());
    block["transactions"] = json!([]);
    block["uncles"] = json!([]);
    block["withdrawals"] = json!([]);
    Ok(block)
}

pub fn build_devnet(seed: u64, recorded_at: u64) -> Result<Devnet, GenError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let eth_secrets: Vec<[u8; 32]> = (1..=2).map(|i| test_secret(&format!("eth custodian {i}"))).collect();
    let btc_secrets: Vec<[u8; 32]> = (1..=2).map(|i| test_secret(&format!("btc custodian {i}"))).collect();
    let eth_addrs = eth_secrets.iter().map(eth_owner).collect::<Result<Vec<_>, _>>()?;
    let btc_scripts = btc_secrets.iter().map(btc_owner).collect::<Result<Vec<_>, _>>()?;

    // Ethereum state: custodians, a token contract, and unrelated accounts
    // so proofs have realistic depth.
    let mut accounts: BTreeMap<[u8; 20], AccountSpec> = BTreeMap::new();
    for (addr, bal) in eth_addrs.iter().zip(ETH_BALANCES) {
        accounts.insert(*addr, AccountSpec::eoa(Amount::from_u128(bal)));
    }
    for _ in 0..300 {
        let bal = rng.gen_range(0..50_000u128) * 1_000_000_000_000;
        accounts.insert(random_array(&mut rng), AccountSpec { nonce: rng.gen_range(0..40), ..AccountSpec::eoa(Amount::from_u128(bal)) });
    }
    let token: [u8; 20] = keccak256("ppos devnet token").0[12..].try_into().expect("20 bytes");
    let slot = Amount::from_u64(TOKEN_MAPPING_SLOT).value();
    let mut storage = BTreeMap::new();
    let mut supply = TOKEN_BALANCE;
    storage.insert(storage_slot_key(&eth_addrs[0], slot), Amount::from_u128(TOKEN_BALANCE));
    for _ in 0..150 {
        let bal = rng.gen_range(1..10_000_000_000u128);
        supply += bal;
        storage.insert(storage_slot_key(&random_array(&mut rng), slot), Amount::from_u128(bal));
    }
    let mut supply_slot = [0u8; 32];
    supply_slot[24..].copy_from_slice(&TOKEN_SUPPLY_SLOT.to_be_bytes());
    storage.insert(supply_slot, Amount::from_u128(supply));
    accounts.insert(
        token,
        AccountSpec {
            nonce: 1,
            balance: Amount::ZERO,
            code_hash: Some(keccak256("ppos devnet token runtime")),
            storage,
        },
    );

    let mut state = build_state(&accounts);
    let block = block_json(&mut rng, state.state_root())?;
    let (block_hash, header_rlp) = ppos_rpc::validated_header(&block)?;

    let record = |proof: ppos_rpc::ProofResponse, keys: &[[u8; 32]]| -> Result<RecordedFixture, GenError> {
        let bundle = proof.to_bundle(block_hash, header_rlp.clone())?;
        let keys: Vec<String> = keys.iter().map(hexfmt::encode).collect();
        let params = json!([proof.address.clone(), keys, {"blockHash": block_hash.to_hex()}]);
        let f = RecordedFixture::new(
            params,
            FixtureResponse { proof, block: block.clone() },
            Some(NOTE.into()),
            bundle,
            recorded_at,
        );
        f.check()?;
        Ok(f)
    };
    let mut eth_fixtures = Vec::new();
    for addr in &eth_addrs {
        eth_fixtures.push(record(state.proof(addr, &[]), &[])?);
    }
    let holder_slot = storage_slot_key(&eth_addrs[0], slot);
    let erc20_fixture = record(state.proof(&token, &[holder_slot]), &[holder_slot])?;

    // Bitcoin snapshot.
    let mut utxos = Vec::new();
    for (script, amounts) in btc_scripts.iter().zip(BTC_UTXOS) {
        for &amount in amounts {
            utxos.push(Utxo { txid: random_array(&mut rng), vout: rng.gen_range(0..4), amount, script_pubkey: script.clone() });
        }
    }
    for _ in 0..500 {
        let mut script = vec![0x00, 0x14];
        script.extend_from_slice(&random_array::<20>(&mut rng));
        utxos.push(Utxo {
            txid: random_array(&mut rng),
            vout: rng.gen_range(0..8),
            amount: rng.gen_range(546..500_000_000),
            script_pubkey: script,
        });
    }
    let snapshot_block = sha256d("ppos devnet bitcoin snapshot").0;
    let snapshot = ingest_records(snapshot_block, utxos)?;
    let utxo_root = build_utxo_tree(&snapshot)?.root();

    // Users: every asset's liabilities sum to exactly its reserves.
    let eth_total: u128 = ETH_BALANCES.iter().sum();
    let btc_total: u128 = BTC_UTXOS.iter().flat_map(|a| a.iter()).map(|&v| v as u128).sum();
    let assets: [(&str, [u8; 20], u128); 3] =
        [(ETH_NETWORK, [0u8; 20], eth_total), (ETH_NETWORK, token, TOKEN_BALANCE), (BTC_NETWORK, [0u8; 20], btc_total)];
    let mut balances: Vec<Vec<BalanceInput>> = vec![Vec::new(); USER_COUNT];
    for (network, asset, total) in assets {
        let holders: Vec<usize> = (0..USER_COUNT).filter(|_| rng.gen_bool(0.7)).collect();
        for (user, amount) in holders.iter().zip(split(&mut rng, total, holders.len())) {
            if amount > 0 {
                balances[*user].push(BalanceInput {
                    network: network.into(),
                    asset: hexfmt::encode(asset),
                    amount: amount.to_string(),
                });
            }
        }
    }
    let users = balances
        .into_iter()
        .enumerate()
        .map(|(i, balances)| UserInput { user_id: format!("devnet-user-{:04}", i + 1), balances })
        .collect();

    let keys = DevnetKeys {
        note: "test-only keys for the synthetic devnet scenario".into(),
        eth_network: ETH_NETWORK.into(),
        btc_network: BTC_NETWORK.into(),
        block_hash,
        block_fixture: "eth/devnet-block.json".into(),
        eth_custodians: eth_secrets
            .iter()
            .zip(&eth_addrs)
            .enumerate()
            .map(|(i, (s, a))| EthCustodian { secret: *s, address: *a, fixture: format!("eth/devnet-eth-{}.json", i + 1) })
            .collect(),
        token: TokenHolding {
            contract: token,
            mapping_slot: TOKEN_MAPPING_SLOT,
            holder_secret: eth_secrets[0],
            holder: eth_addrs[0],
            fixture: "eth/devnet-erc20.json".into(),
        },
        btc_custodians: btc_secrets
            .iter()
            .zip(btc_scripts)
            .map(|(s, script)| BtcCustodian { secret: *s, script })
            .collect(),
        utxo_root,
        chainstate: "btc/devnet-chainstate.jsonl".into(),
        users: "liabilities/devnet-users.jsonl".into(),
    };
    Ok(Devnet { keys, block, eth_fixtures, erc20_fixture, snapshot, users })
}
