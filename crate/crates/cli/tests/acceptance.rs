//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Every threshold below is pinned; nothing adapts to the machine.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use eth_trie::{EthTrie, MemoryDB, Trie};
use keccak_hasher::KeccakHasher;
use num_bigint::BigUint;
use ppos_core::attestor::{self, canonical_bytes, statement_digest, Attestation, Attestor, ProvingBackend, RelationId};
use ppos_core::btcstate::{build_utxo_tree, check_btc_reserve_relation, ingest_records, Utxo};
use ppos_core::ethstate::{
    check_erc20_min_balance_relation, check_eth_min_balance_relation, verify_mpt_proof, AccountProofBundle,
    Erc20ReserveStatement, Erc20Witness, EthReserveStatement,
};
use ppos_core::hashcodec::rlp::{self, RlpItem};
use ppos_core::liabilities::{check_liability_relation, make_user_leaf, AssetId, LiabilityTree, UserLeaf};
use ppos_core::solvency::{check_solvency_relation, ReserveProof};
use ppos_core::{hexfmt, keccak256, sha256d, Amount, Digest32, Reason, RelationVerdict};
use ppos_fixturegen::scenario::{Instance, Scenario};
use ppos_registry::{Registry, Round, RoundRegistry, RoundStatus, Snapshot, Submission};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use tiny_keccak::{Hasher, Keccak};

const RLP_FUZZ_ITEMS: usize = 10_000;
const RLP_FUZZ_BUDGET: Duration = Duration::from_secs(10);
const MPT_TRIES: usize = 100;
const MPT_MAX_ENTRIES: usize = 64;
const ETH_MUTATIONS_PER_FIXTURE: usize = 120;
const POPULATIONS: [usize; 3] = [10, 100, 1_024];
const POPULATION_BUDGET: Duration = Duration::from_secs(5);
const OVERSIZED_WITNESSES: usize = 300;
const UTXO_COUNT: usize = 10_000;
const UTXO_BUDGET: Duration = Duration::from_secs(10);
const UTXO_PERMUTATIONS: usize = 10;
const STATEMENT_MUTATIONS: usize = 1_000;
const REGISTRY_SEQUENCES: usize = 10_000;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn scenario() -> &'static Scenario {
    static S: std::sync::OnceLock<Scenario> = std::sync::OnceLock::new();
    S.get_or_init(|| Scenario::pinned().expect("pinned fixtures load"))
}

fn d(s: &str) -> Digest32 {
    s.parse().unwrap()
}

fn plain_hex(b: impl AsRef<[u8]>) -> String {
    hexfmt::strip_prefix(&hexfmt::encode(b)).to_string()
}

// ---- codec and hash vectors ------------------------------------------------

fn oracle_keccak(data: &[u8]) -> [u8; 32] {
    let mut k = Keccak::v256();
    k.update(data);
    let mut out = [0u8; 32];
    k.finalize(&mut out);
    out
}

fn oracle_sha256d(data: &[u8]) -> [u8; 32] {
    Sha256::digest(Sha256::digest(data)).into()
}

fn random_item(rng: &mut ChaCha20Rng, depth: usize) -> RlpItem {
    if depth >= 4 || rng.gen_bool(0.6) {
        let len = match rng.gen_range(0..4) {
            0 => 0,
            1 => 1,
            2 => rng.gen_range(2..56),
            _ => rng.gen_range(56..300),
        };
        let mut v = vec![0u8; len];
        rng.fill(&mut v[..]);
        RlpItem::Bytes(v)
    } else {
        RlpItem::List((0..rng.gen_range(0..6)).map(|_| random_item(rng, depth + 1)).collect())
    }
}

fn codec_vectors() -> Outcome {
    let vectors: [(&str, Digest32, Digest32, [u8; 32]); 3] = [
        ("keccak256(\"\")", keccak256(b""), d("c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"), oracle_keccak(b"")),
        ("keccak256(0x80)", keccak256([0x80]), d("56e81f171bcc55a6ff8345e692c0f86e5b48e01b996cadc001622fb5e363b421"), oracle_keccak(&[0x80])),
        ("sha256d(\"\")", sha256d(b""), d("5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456"), oracle_sha256d(b"")),
    ];
    for (name, ours, pinned, oracle) in vectors {
        ensure!(ours == pinned && ours.0 == oracle, "{name}: {ours}");
    }

    let btc_genesis = hexfmt::decode(concat!(
        "01000000",
        "0000000000000000000000000000000000000000000000000000000000000000",
        "3ba3edfd7a7b12b27ac72c3e67768f617fc81bc3888a51323a9fb8aa4b1e5e4a",
        "29ab5f49ffff001d1dac2b7c",
    ))
    .unwrap();
    ensure!(
        sha256d(&btc_genesis).to_reversed_hex() == "000000000019d6689c085ae165831e934ff763ae46a2a6c172b3f1b60a8ce26f",
        "bitcoin genesis hash"
    );

    let block: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("eth/mainnet-genesis-block.json")).unwrap())
            .unwrap();
    let (hash, header) = ppos_rpc::validated_header(&block).map_err(|e| format!("mainnet genesis: {e}"))?;
    ensure!(
        hash == d("d4e56740f876aef8c010b86a40d5f56745a118d0906a34e69aec8c0db1cb8fa3") && keccak256(&header) == hash,
        "mainnet genesis hash {hash}"
    );

    let b = |s: &[u8]| RlpItem::bytes(s.to_vec());
    let l = RlpItem::List;
    let harvested: Vec<(RlpItem, &str)> = vec![
        (b(b"dog"), "83646f67"),
        (l(vec![b(b"cat"), b(b"dog")]), "c88363617483646f67"),
        (b(b""), "80"),
        (l(vec![]), "c0"),
        (RlpItem::u64(15), "0f"),
        (RlpItem::u64(1024), "820400"),
        (l(vec![l(vec![]), l(vec![l(vec![])]), l(vec![l(vec![]), l(vec![l(vec![])])])]), "c7c0c1c0c3c0c1c0"),
        (
            b(b"Lorem ipsum dolor sit amet, consectetur adipisicing elit"),
            "b8384c6f72656d20697073756d20646f6c6f722073697420616d65742c20636f6e7365637465747572206164697069736963696e6720656c6974",
        ),
    ];
    for (item, hex) in &harvested {
        ensure!(plain_hex(item.encode()) == *hex, "encode {item:?}");
        ensure!(rlp::decode(&hexfmt::decode(hex).unwrap()).as_ref() == Ok(item), "decode {hex}");
    }

    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let start = Instant::now();
    for i in 0..RLP_FUZZ_ITEMS {
        let item = random_item(&mut rng, 0);
        ensure!(rlp::decode(&item.encode()).as_ref() == Ok(&item), "roundtrip item {i}");
    }
    let took = start.elapsed();
    ensure!(took < RLP_FUZZ_BUDGET, "rlp fuzz took {took:?}");
    Ok(format!("5 hash vectors, {} rlp vectors, {RLP_FUZZ_ITEMS} roundtrips in {took:.2?}", harvested.len()))
}

// ---- MPT against a reference trie -------------------------------------------

fn mpt_oracle() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (mut agree, mut total) = (0usize, 0usize);
    for t in 0..MPT_TRIES {
        let n = rng.gen_range(1..=MPT_MAX_ENTRIES);
        let entries: Vec<(Vec<u8>, Vec<u8>)> = (0..n)
            .map(|_| {
                let key: [u8; 20] = rng.gen();
                // RLP-shaped values, as state values always are
                let mut raw = vec![0u8; rng.gen_range(1..70)];
                rng.fill(&mut raw[..]);
                (key.to_vec(), RlpItem::Bytes(raw).encode())
            })
            .collect();
        let mut trie = EthTrie::new(Arc::new(MemoryDB::new(true)));
        for (k, v) in &entries {
            trie.insert(keccak256(k).as_ref(), v).unwrap();
        }
        let root = Digest32(trie.root_hash().unwrap().0);
        let reference_root = triehash::sec_trie_root::<KeccakHasher, _, _, _>(entries.clone());
        ensure!(root.0 == reference_root, "trie {t}: reference implementations disagree on the root");
        for (k, v) in &entries {
            let proof = trie.get_proof(keccak256(k).as_ref()).unwrap();
            total += 1;
            if verify_mpt_proof(&root, k, &proof).ok() == Some(Some(v.clone())) {
                agree += 1;
            }
        }
        for _ in 0..10 {
            let absent: [u8; 20] = rng.gen();
            let hk = keccak256(absent);
            let proof = trie.get_proof(hk.as_ref()).unwrap();
            let trie_root = trie.root_hash().unwrap();
            let reference = trie.verify_proof(trie_root, hk.as_ref(), proof.clone()).unwrap();
            total += 1;
            if verify_mpt_proof(&root, &absent, &proof).ok() == Some(reference) {
                agree += 1;
            }
        }
    }
    ensure!(agree == total, "{agree}/{total} lookups agree");
    Ok(format!("{MPT_TRIES} tries, {total}/{total} inclusion and exclusion results agree"))
}

// ---- Ethereum fixtures -------------------------------------------------------

fn flip(rng: &mut ChaCha20Rng, bytes: &mut [u8]) {
    let at = rng.gen_range(0..bytes.len());
    bytes[at] ^= rng.gen_range(1..=255u8);
}

/// One single-byte change somewhere in the bundle. Returns the part hit.
fn mutate_bundle(rng: &mut ChaCha20Rng, b: &mut AccountProofBundle, with_storage: bool) -> &'static str {
    match rng.gen_range(0..if with_storage { 4 } else { 3 }) {
        0 => {
            flip(rng, &mut b.header_rlp);
            "header"
        }
        1 => {
            let i = rng.gen_range(0..b.account_proof.len());
            flip(rng, &mut b.account_proof[i]);
            "account node"
        }
        2 => {
            match rng.gen_range(0..4) {
                0 => {
                    let mut n = b.account.nonce.to_be_bytes();
                    flip(rng, &mut n);
                    b.account.nonce = u64::from_be_bytes(n);
                }
                1 => {
                    let mut v = b.account.balance.to_be_bytes();
                    flip(rng, &mut v);
                    b.account.balance = Amount::from_canonical(&v).unwrap();
                }
                2 => flip(rng, &mut b.account.storage_root.0),
                _ => flip(rng, &mut b.account.code_hash.0),
            }
            "account"
        }
        _ => {
            let sp = &mut b.storage_proofs[0];
            if rng.gen_bool(0.5) {
                let i = rng.gen_range(0..sp.proof.len());
                flip(rng, &mut sp.proof[i]);
                "storage node"
            } else {
                let mut v = sp.value.to_be_bytes();
                flip(rng, &mut v);
                sp.value = Amount::from_canonical(&v).unwrap();
                "storage value"
            }
        }
    }
}

fn eth_fixtures() -> Outcome {
    let dir = fixtures().join("eth");
    let mut mainnet: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy();
            n.starts_with("mainnet-genesis-") && !n.ends_with("-block.json")
        })
        .collect();
    mainnet.sort();
    ensure!(mainnet.len() >= 3, "only {} mainnet fixtures", mainnet.len());

    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut false_accepts = 0;
    let mut trials = 0;
    for path in &mainnet {
        let bundle = ppos_rpc::load_fixture(path).map_err(|e| format!("{}: {e}", path.display()))?.bundle;
        let st = EthReserveStatement { min_amount: bundle.account.balance, block_hash: bundle.block_hash };
        let v = check_eth_min_balance_relation(&st, &bundle);
        ensure!(v.accepted, "{}: {v}", path.display());
        for _ in 0..ETH_MUTATIONS_PER_FIXTURE {
            let mut m = bundle.clone();
            mutate_bundle(&mut rng, &mut m, false);
            trials += 1;
            if check_eth_min_balance_relation(&st, &m).accepted {
                false_accepts += 1;
            }
        }
    }

    let s = scenario();
    let (st, w): (&Erc20ReserveStatement, &Erc20Witness) = (&s.erc20_statement, &s.erc20_witness);
    let v = check_erc20_min_balance_relation(st, w);
    ensure!(v.accepted, "erc20 fixture: {v}");
    let mut hit = BTreeMap::new();
    for _ in 0..ETH_MUTATIONS_PER_FIXTURE {
        let mut m = w.clone();
        *hit.entry(mutate_bundle(&mut rng, &mut m.bundle, true)).or_insert(0) += 1;
        trials += 1;
        if check_erc20_min_balance_relation(st, &m).accepted {
            false_accepts += 1;
        }
    }
    ensure!(hit.len() == 5, "mutations did not reach every part: {hit:?}");
    ensure!(false_accepts == 0, "{false_accepts} of {trials} mutations accepted");
    Ok(format!("{} account fixtures + 1 token fixture verify; 0/{trials} mutations accepted", mainnet.len()))
}

// ---- liabilities -------------------------------------------------------------

fn population(n: usize, seed: u64) -> Vec<UserLeaf> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut token = [0u8; 20];
    token[19] = 0x42;
    let assets = [AssetId::native("bitcoin").unwrap(), AssetId::native("ethereum").unwrap(), AssetId::new("ethereum", token).unwrap()];
    (0..n)
        .map(|i| {
            let mut balances = Vec::new();
            for a in &assets {
                if rng.gen_bool(0.7) {
                    let shift = rng.gen_range(0..100);
                    balances.push((a.clone(), Amount::from_u128(rng.gen::<u128>() >> shift)));
                }
            }
            make_user_leaf(format!("user-{i}").as_bytes(), balances, rng.gen()).unwrap()
        })
        .collect()
}

fn liabilities() -> Outcome {
    let mut report = Vec::new();
    for (k, &n) in POPULATIONS.iter().enumerate() {
        let users = population(n, 40 + k as u64);
        let start = Instant::now();
        let tree = LiabilityTree::build(users.clone()).map_err(|e| e.to_string())?;
        let v = check_liability_relation(&tree.statement(), &tree.witness());
        let took = start.elapsed();
        ensure!(v.accepted, "{n} users: {v}");
        ensure!(took < POPULATION_BUDGET, "{n} users took {took:?}");
        for i in 0..n {
            let bundle = tree.export_user_proof(i).map_err(|e| e.to_string())?;
            ensure!(bundle.verify_for_user(format!("user-{i}").as_bytes()), "user {i} of {n} does not verify");
        }
        let mut oracle: BTreeMap<AssetId, BigUint> = BTreeMap::new();
        for u in &users {
            for (id, a) in &u.balances {
                *oracle.entry(id.clone()).or_default() += BigUint::from_bytes_be(&a.to_be_bytes());
            }
        }
        let ours: BTreeMap<AssetId, BigUint> =
            tree.sum_leaf().totals.iter().map(|(id, a)| (id.clone(), BigUint::from_bytes_be(&a.to_be_bytes()))).collect();
        ensure!(ours == oracle, "{n} users: totals differ from the oracle");

        let st = tree.statement();
        let mut rng = ChaCha20Rng::seed_from_u64(50 + k as u64);
        for _ in 0..20 {
            let mut w = tree.witness();
            let u = rng.gen_range(0..w.user_leaves.len());
            let Some(e) = w.user_leaves[u].entries.choose_mut(&mut rng) else { continue };
            let old = Amount::from_canonical(&hexfmt::decode(&e.amount).unwrap()).unwrap();
            let new = old.checked_add(Amount::from_u64(1)).unwrap();
            e.amount = hexfmt::encode(new.to_be_bytes());
            ensure!(!check_liability_relation(&st, &w).accepted, "{n} users: +1 on user {u} accepted");
        }
        for _ in 0..5 {
            let mut w = tree.witness();
            w.user_leaves.remove(rng.gen_range(0..w.user_leaves.len()));
            w.levels.clear();
            ensure!(!check_liability_relation(&st, &w).accepted, "{n} users: dropped user accepted");
        }
        report.push(format!("{n} in {took:.2?}"));
    }
    Ok(format!("populations {}; proofs, oracle totals and mutations all hold", report.join(", ")))
}

// ---- non-negativity ----------------------------------------------------------

fn oversized(rng: &mut ChaCha20Rng) -> String {
    let mut raw = vec![0u8; rng.gen_range(33..64)];
    rng.fill(&mut raw[..]);
    if rng.gen_bool(0.3) {
        // a "negative" value sign-extended past 32 bytes
        let extra = raw.len() - 32;
        raw[..extra].fill(0xff);
    }
    hexfmt::encode(raw)
}

fn non_negativity() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let tree = LiabilityTree::build(population(40, 5)).unwrap();
    let s = scenario();
    let sst = s.solvency_statement(1);
    let sw = s.solvency_witness(&sst).map_err(|e| e.to_string())?;
    let mut rejected = 0;
    for t in 0..OVERSIZED_WITNESSES {
        let verdict: RelationVerdict = match t % 3 {
            0 => {
                let mut w = tree.witness();
                let leaf = w.user_leaves.iter_mut().filter(|l| !l.entries.is_empty()).collect::<Vec<_>>();
                let leaf = leaf.into_iter().nth(rng.gen_range(0..30)).unwrap();
                let n = leaf.entries.len();
                leaf.entries[rng.gen_range(0..n)].amount = oversized(&mut rng);
                check_liability_relation(&tree.statement(), &w)
            }
            1 => {
                let mut w = tree.witness();
                let n = w.sum_leaf.len();
                w.sum_leaf[rng.gen_range(0..n)].amount = oversized(&mut rng);
                check_liability_relation(&tree.statement(), &w)
            }
            _ => {
                let mut w = sw.clone();
                let n = w.sum_leaf.len();
                w.sum_leaf[rng.gen_range(0..n)].amount = oversized(&mut rng);
                check_solvency_relation(&sst, &w)
            }
        };
        if !verdict.accepted && verdict.reason == Reason::InvalidAmount {
            rejected += 1;
        }
    }
    ensure!(rejected == OVERSIZED_WITNESSES, "{rejected}/{OVERSIZED_WITNESSES} rejected with InvalidAmount");
    Ok(format!("{rejected}/{OVERSIZED_WITNESSES} oversized amounts rejected with InvalidAmount"))
}

// ---- Bitcoin commitment -------------------------------------------------------

fn btc_commitment() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let script = |tag: u8| [&[0x76, 0xa9, 0x14][..], &[tag; 20], &[0x88, 0xac]].concat();
    let utxos: Vec<Utxo> = (0..UTXO_COUNT)
        .map(|_| Utxo {
            txid: rng.gen(),
            vout: rng.gen_range(0..8),
            amount: rng.gen_range(546..2_100_000_000_000_000),
            script_pubkey: script(rng.gen_range(0..64)),
        })
        .collect();
    let start = Instant::now();
    let snapshot = ingest_records([9u8; 32], utxos.clone()).map_err(|e| e.to_string())?;
    let tree = build_utxo_tree(&snapshot).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure!(took < UTXO_BUDGET, "ingest + build took {took:?}");
    for p in 0..UTXO_PERMUTATIONS {
        let mut shuffled = utxos.clone();
        shuffled.shuffle(&mut rng);
        let again = build_utxo_tree(&ingest_records([9u8; 32], shuffled).unwrap()).unwrap();
        ensure!(again.root() == tree.root(), "permutation {p} changed the root");
    }
    let w = tree.witness_for_script(&snapshot, &script(7));
    let sum = w.total();
    let at = check_btc_reserve_relation(&tree.statement(sum), &w);
    ensure!(at.accepted, "at sum: {at}");
    let above = check_btc_reserve_relation(&tree.statement(sum.checked_add(Amount::from_u64(1)).unwrap()), &w);
    ensure!(!above.accepted, "sum + 1 sat accepted");
    let mut dup = w.clone();
    dup.utxos.push(dup.utxos[0].clone());
    dup.paths.push(dup.paths[0].clone());
    let v = check_btc_reserve_relation(&tree.statement(sum), &dup);
    ensure!(v.reason == Reason::DuplicateLeaf, "duplicate leaf: {v}");
    Ok(format!(
        "{UTXO_COUNT} utxos in {took:.2?}, root stable over {UTXO_PERMUTATIONS} permutations, boundary and duplicates hold"
    ))
}

// ---- solvency boundary ---------------------------------------------------------

fn submission(inst: &Instance) -> Submission {
    let att = attestor::prove(inst.relation.as_str(), &inst.statement, &inst.witness).expect("instance proves");
    Submission::new(&inst.statement, att)
}

fn round_snapshot(s: &Scenario) -> Snapshot {
    Snapshot { eth_block_hash: Some(s.keys.block_hash), btc: Some(s.btc_commitment()) }
}

fn solvency_boundary() -> Outcome {
    let s = scenario();
    let mut reg = Registry::in_memory();
    reg.open_round(round_snapshot(s)).map_err(|e| e.to_string())?;
    reg.submit_liabilities(1, submission(&s.liability_instance())).map_err(|e| e.to_string())?;
    for r in s.reserve_instances() {
        reg.submit_reserve(1, submission(&r)).map_err(|e| e.to_string())?;
    }
    let sol = s.solvency_instance(1).map_err(|e| e.to_string())?;
    let round = reg.finalize_round(1, submission(&sol)).map_err(|e| e.to_string())?;
    ensure!(round.status == RoundStatus::Finalized { accepted: true, reason: Reason::Ok }, "solvent round: {}", round.status);

    let assets = [s.eth_asset(), s.token_asset(), s.btc_asset()];
    for asset in &assets {
        let mut users = s.users.clone();
        let b = users
            .iter_mut()
            .flat_map(|u| u.balances.iter_mut())
            .find(|b| b.network == asset.network && hexfmt::decode_array::<20>(&b.asset).unwrap() == asset.asset)
            .unwrap();
        b.amount = b.amount.parse::<Amount>().unwrap().checked_add(Amount::from_u64(1)).unwrap().to_string();
        let bumped = s.with_users(users).map_err(|e| e.to_string())?;
        let st = bumped.solvency_statement(1);
        let v = check_solvency_relation(&st, &bumped.solvency_witness(&st).map_err(|e| e.to_string())?);
        ensure!(v.reason == Reason::AssetShortfall, "{asset} + 1: {v}");
    }

    let st = s.solvency_statement(1);
    let full = s.solvency_witness(&st).map_err(|e| e.to_string())?;
    for i in 0..full.claims.len() {
        let mut w = full.clone();
        w.claims.remove(i);
        let v = check_solvency_relation(&st, &w);
        ensure!(v.reason == Reason::AssetShortfall, "without claim {i}: {v}");
    }

    let next = s.solvency_statement(2);
    let v = check_solvency_relation(&next, &full);
    ensure!(v.reason == Reason::BadOwnership, "round 1 signatures in round 2: {v}");
    Ok(format!(
        "solvent round finalized accepted; +1 on each of {} assets and each of {} dropped claims give AssetShortfall; replayed signatures rejected",
        assets.len(),
        full.claims.len()
    ))
}

// ---- attestor binding ------------------------------------------------------------

fn all_instances(s: &Scenario) -> Result<Vec<Instance>, String> {
    let mut v = vec![s.liability_instance()];
    v.extend(s.reserve_instances());
    v.push(s.solvency_instance(1).map_err(|e| e.to_string())?);
    Ok(v)
}

fn attestor_binding() -> Outcome {
    let s = scenario();
    let all = all_instances(s)?;
    let mut atts = Vec::new();
    for i in &all {
        let att = attestor::prove(i.relation.as_str(), &i.statement, &i.witness).map_err(|e| format!("{}: {e}", i.relation))?;
        let v = attestor::verify(&i.statement, &att);
        ensure!(v.accepted, "{}: {v}", i.relation);
        atts.push(att);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut false_accepts = 0;
    for t in 0..STATEMENT_MUTATIONS {
        let k = t % all.len();
        let mut st = all[k].statement.clone();
        flip(&mut rng, &mut st);
        if attestor::verify(&st, &atts[k]).accepted {
            false_accepts += 1;
        }
    }
    ensure!(false_accepts == 0, "{false_accepts} of {STATEMENT_MUTATIONS} mutated statements accepted");
    let relations: std::collections::BTreeSet<_> = all.iter().map(|i| i.relation.as_str()).collect();
    Ok(format!(
        "{} instances across {} relations roundtrip; 0/{STATEMENT_MUTATIONS} mutated statements accepted",
        all.len(),
        relations.len()
    ))
}

// ---- registry replay and forward-only transitions -----------------------------------

struct Stub;

impl ProvingBackend for Stub {
    fn name(&self) -> &'static str {
        "stub-v1"
    }

    fn prove(&self, _: RelationId, _: &[u8], witness: &[u8]) -> Vec<u8> {
        witness.to_vec()
    }

    fn verify(&self, _: RelationId, _: &[u8], payload: &[u8]) -> RelationVerdict {
        if payload == b"ok" {
            RelationVerdict::accept()
        } else {
            RelationVerdict::reject(Reason::AssetShortfall, "stub")
        }
    }
}

fn stub(relation: RelationId, statement: &[u8], ok: bool) -> Submission {
    Submission::new(
        statement,
        Attestation {
            relation: relation.as_str().into(),
            backend: "stub-v1".into(),
            statement_digest_hex: statement_digest(statement),
            payload_base64: if ok { b"ok".to_vec() } else { b"no".to_vec() },
        },
    )
}

fn random_sequence(rng: &mut ChaCha20Rng, s: &Scenario, reserves: &[Instance], solvency: &[Vec<u8>]) -> Result<usize, String> {
    let mut reg = Registry::in_memory().with_attestor(Attestor::with_backends(vec![Box::new(Stub)]));
    let liab = s.liability_instance().statement;
    let mut transitions = 0;
    for _ in 0..rng.gen_range(1..40) {
        let before: Vec<Round> = reg.rounds().to_vec();
        let latest = before.len() as u64;
        let round = if rng.gen_bool(0.8) { latest } else { rng.gen_range(0..6) };
        let ok = rng.gen_bool(0.8);
        let result = match rng.gen_range(0..10) {
            0 | 1 => {
                let snap = if ok { round_snapshot(s) } else { Snapshot { eth_block_hash: Some(Digest32([4; 32])), ..round_snapshot(s) } };
                reg.open_round(snap)
            }
            2 | 3 => reg.submit_liabilities(round, stub(RelationId::Liability, &liab, ok)),
            4..=6 => {
                let r = reserves.choose(rng).unwrap();
                reg.submit_reserve(round, stub(r.relation, &r.statement, ok))
            }
            7 | 8 => {
                let cites = if rng.gen_bool(0.8) { round } else { rng.gen_range(1..=solvency.len() as u64) };
                let st = &solvency[(cites.clamp(1, solvency.len() as u64) - 1) as usize];
                reg.finalize_round(round, stub(RelationId::Solvency, st, rng.gen_bool(0.5)))
            }
            _ => reg.get_round(round),
        };
        let after = reg.rounds();
        ensure!(after.len() >= before.len(), "a round disappeared");
        for (i, r) in after.iter().enumerate() {
            ensure!(r.round_id == i as u64 + 1, "round ids not consecutive");
        }
        for (b, a) in before.iter().zip(after) {
            ensure!(a.status.rank() >= b.status.rank(), "round {} moved {} -> {}", a.round_id, b.status, a.status);
            ensure!(!b.status.is_finalized() || a == b, "finalized round {} changed", a.round_id);
            if a.status.rank() > b.status.rank() {
                transitions += 1;
            }
        }
        ensure!(result.is_ok() || before.as_slice() == after, "failed operation changed state");
    }
    Ok(transitions)
}

fn registry_replay() -> Outcome {
    let s = scenario();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("registry.jsonl");
    let mut reg = Registry::open(&path).map_err(|e| e.to_string())?.with_clock(|| 1_700_000_000);
    let reserves: Vec<Submission> = s.reserve_instances().iter().map(submission).collect();
    for round in 1..=3u64 {
        reg.open_round(round_snapshot(s)).map_err(|e| e.to_string())?;
        reg.submit_liabilities(round, submission(&s.liability_instance())).map_err(|e| e.to_string())?;
        for r in reserves.iter().take(round as usize + 2) {
            reg.submit_reserve(round, r.clone()).map_err(|e| e.to_string())?;
        }
        let sol = s.solvency_instance(round).map_err(|e| e.to_string())?;
        reg.finalize_round(round, submission(&sol)).map_err(|e| e.to_string())?;
    }
    let before = serde_json::to_vec(reg.rounds()).unwrap();
    let events = reg.events().to_vec();
    drop(reg);
    let replayed = Registry::open(&path).map_err(|e| e.to_string())?;
    ensure!(serde_json::to_vec(replayed.rounds()).unwrap() == before, "replayed state differs");
    ensure!(replayed.events() == events.as_slice(), "replayed events differ");
    ensure!(replayed.audit().is_empty(), "stored attestations fail re-verification");

    let reserve_insts = s.reserve_instances();
    let solvency: Vec<Vec<u8>> = (1..=16).map(|r| canonical_bytes(&s.solvency_statement(r))).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut transitions = 0;
    for i in 0..REGISTRY_SEQUENCES {
        transitions += random_sequence(&mut rng, s, &reserve_insts, &solvency).map_err(|e| format!("sequence {i}: {e}"))?;
    }
    Ok(format!(
        "3-round history ({} events) replays byte-identically; {REGISTRY_SEQUENCES} random sequences, {transitions} forward transitions, none backward",
        events.len()
    ))
}

// ---- statement privacy -----------------------------------------------------------------

fn amount_forms(a: Amount) -> Vec<Vec<u8>> {
    vec![a.to_string().into_bytes(), hexfmt::strip_prefix(&a.to_hex_quantity()).as_bytes().to_vec(), plain_hex(a.to_be_bytes()).into_bytes()]
}

fn byte_forms(b: &[u8]) -> Vec<Vec<u8>> {
    vec![plain_hex(b).into_bytes(), b.to_vec()]
}

fn less(a: Amount, by: u64) -> Amount {
    a.checked_sub(Amount::from_u64(by)).unwrap()
}

fn statement_privacy() -> Outcome {
    let s = scenario();
    let mut cases: Vec<(RelationId, Vec<u8>, Vec<Vec<u8>>)> = Vec::new();

    let mut private = Vec::new();
    for u in &s.users {
        private.push(u.user_id.clone().into_bytes());
        for b in &u.balances {
            private.extend(amount_forms(b.amount.parse().unwrap()));
        }
    }
    for t in s.tree.sum_leaf().totals.values() {
        private.extend(amount_forms(*t));
    }
    cases.push((RelationId::Liability, canonical_bytes(&s.tree.statement()), private));

    // Reserve minimums are public; the statements carry a minimum below the
    // holding, and the exact holding and its owner must not appear.
    let b = &s.eth[0];
    let st = EthReserveStatement { min_amount: less(b.account.balance, 7_777_777), block_hash: b.block_hash };
    let mut private = byte_forms(&b.address);
    private.extend(amount_forms(b.account.balance));
    cases.push((RelationId::EthReserve, canonical_bytes(&st), private));

    let w = &s.erc20_witness;
    let st = Erc20ReserveStatement { min_amount: less(s.erc20_statement.min_amount, 123_457), ..s.erc20_statement.clone() };
    let mut private = byte_forms(&w.holder);
    private.extend(amount_forms(w.bundle.storage_proofs[0].value));
    cases.push((RelationId::Erc20Reserve, canonical_bytes(&st), private));

    let script = &s.keys.btc_custodians[0].script;
    let w = s.utxo_tree.witness_for_script(&s.snapshot, script);
    let st = s.utxo_tree.statement(less(w.total(), 654_321));
    let mut private = byte_forms(script);
    private.extend(amount_forms(w.total()));
    for u in &w.utxos {
        private.extend(byte_forms(&u.txid));
    }
    cases.push((RelationId::BtcReserve, canonical_bytes(&st), private));

    let st = s.solvency_statement(1);
    let w = s.solvency_witness(&st).map_err(|e| e.to_string())?;
    let mut private = Vec::new();
    for c in &w.claims {
        private.extend(amount_forms(c.amount));
        match &c.proof {
            ReserveProof::Eth { witness, .. } => private.extend(byte_forms(&witness.address)),
            ReserveProof::Erc20 { witness, .. } => private.extend(byte_forms(&witness.holder)),
            ReserveProof::Btc { witness, .. } => private.extend(byte_forms(&witness.script_template)),
        }
    }
    for t in s.tree.sum_leaf().totals.values() {
        private.extend(amount_forms(*t));
    }
    cases.push((RelationId::Solvency, canonical_bytes(&st), private));

    let mut scanned = 0;
    for (relation, statement, private) in &cases {
        let lower = String::from_utf8_lossy(statement).to_lowercase().into_bytes();
        for p in private {
            // very short decimals (a 1-satoshi output) collide with ordinary
            // numbers such as the round id
            if p.len() < 6 {
                continue;
            }
            let p_lower = p.to_ascii_lowercase();
            let hit = statement.windows(p.len()).any(|w| w == p.as_slice())
                || lower.windows(p_lower.len()).any(|w| w == p_lower.as_slice());
            ensure!(!hit, "{relation} statement contains {:?}", String::from_utf8_lossy(p));
            scanned += 1;
        }
    }
    Ok(format!("{} relations, {scanned} private values scanned, none found", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("codec_hash_vectors", codec_vectors),
        ("mpt_oracle_equivalence", mpt_oracle),
        ("ethereum_fixtures", eth_fixtures),
        ("liabilities", liabilities),
        ("non_negativity", non_negativity),
        ("bitcoin_commitment", btc_commitment),
        ("solvency_boundary", solvency_boundary),
        ("attestor_binding", attestor_binding),
        ("registry_replay", registry_replay),
        ("statement_privacy", statement_privacy),
    ];
    // only this binary's own criteria lines go to stdout
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name:<24} PASS ({took:.2?}) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name:<24} FAIL ({took:.2?}) {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
