//! The pinned devnet scenario, loaded from the fixture files.
#![allow(dead_code)]

use std::io::BufReader;
use std::path::{Path, PathBuf};

use ppos_core::btcstate::{build_utxo_tree, ingest_chainstate, UtxoSnapshot, UtxoTree};
use ppos_core::ethstate::{AccountProofBundle, Erc20ReserveStatement, Erc20Witness, EthReserveStatement};
use ppos_core::hexfmt;
use ppos_core::liabilities::{AssetId, LiabilityTree, UserInput};
use ppos_core::solvency::{
    claim_message, sign_ownership, BtcCommitment, ReserveClaim, ReserveProof, SolvencyStatement, SolvencyWitness,
};
use ppos_core::Amount;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_json(rel: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixtures().join(rel)).unwrap()).unwrap()
}

pub fn bundle(rel: &str) -> AccountProofBundle {
    serde_json::from_value(read_json(rel)["bundle"].clone()).unwrap()
}

fn secret(v: &Value) -> [u8; 32] {
    hexfmt::decode_array(v.as_str().unwrap()).unwrap()
}

pub struct Scenario {
    pub keys: Value,
    pub users: Vec<UserInput>,
    pub tree: LiabilityTree,
    pub eth: Vec<([u8; 32], AccountProofBundle)>,
    pub erc20: ([u8; 32], Erc20ReserveStatement, Erc20Witness),
    pub snapshot: UtxoSnapshot,
    pub utxo_tree: UtxoTree,
    pub btc: Vec<([u8; 32], Vec<u8>)>,
}

pub fn load_users() -> Vec<UserInput> {
    std::fs::read_to_string(fixtures().join("liabilities/devnet-users.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn build_tree(users: &[UserInput], seed: u64) -> LiabilityTree {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let leaves = users.iter().map(|u| u.to_leaf(rng.gen()).unwrap()).collect();
    LiabilityTree::build(leaves).unwrap()
}

impl Scenario {
    pub fn load() -> Self {
        Self::with_users(load_users())
    }

    pub fn with_users(users: Vec<UserInput>) -> Self {
        let keys = read_json("devnet-keys.json");
        let tree = build_tree(&users, 11);
        let eth = keys["eth_custodians"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (secret(&c["secret"]), bundle(c["fixture"].as_str().unwrap())))
            .collect();
        let t = &keys["token"];
        let b = bundle(t["fixture"].as_str().unwrap());
        let holder = hexfmt::decode_array::<20>(t["holder"].as_str().unwrap()).unwrap();
        let st = Erc20ReserveStatement {
            min_amount: b.storage_proofs[0].value,
            block_hash: b.block_hash,
            token_contract: b.address,
            mapping_slot: Amount::from_u64(t["mapping_slot"].as_u64().unwrap()),
        };
        let erc20 = (secret(&t["holder_secret"]), st, Erc20Witness { bundle: b, holder });
        let file = std::fs::File::open(fixtures().join(keys["chainstate"].as_str().unwrap())).unwrap();
        let snapshot = ingest_chainstate(BufReader::new(file)).unwrap();
        let utxo_tree = build_utxo_tree(&snapshot).unwrap();
        let btc = keys["btc_custodians"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (secret(&c["secret"]), hexfmt::decode(c["script"].as_str().unwrap()).unwrap()))
            .collect();
        Scenario { keys, users, tree, eth, erc20, snapshot, utxo_tree, btc }
    }

    pub fn eth_asset(&self) -> AssetId {
        AssetId::native(self.keys["eth_network"].as_str().unwrap()).unwrap()
    }

    pub fn token_asset(&self) -> AssetId {
        AssetId::new(self.keys["eth_network"].as_str().unwrap(), self.erc20.1.token_contract).unwrap()
    }

    pub fn btc_asset(&self) -> AssetId {
        AssetId::native(self.keys["btc_network"].as_str().unwrap()).unwrap()
    }

    pub fn statement(&self, round_id: u64) -> SolvencyStatement {
        SolvencyStatement {
            round_id,
            liabilities_root: self.tree.root(),
            liabilities_sum_leaf_index: self.tree.sum_leaf_index() as u64,
            eth_block_hash: Some(self.eth[0].1.block_hash),
            btc: Some(BtcCommitment { utxo_root: self.utxo_tree.root(), snapshot_block: self.utxo_tree.snapshot_block() }),
        }
    }

    /// One claim per custodian, each for its full proven balance, signed
    /// for `statement`.
    pub fn claims(&self, statement: &SolvencyStatement) -> Vec<ReserveClaim> {
        let mut out = Vec::new();
        for (secret, b) in &self.eth {
            let proof = ReserveProof::Eth {
                statement: EthReserveStatement { min_amount: b.account.balance, block_hash: b.block_hash },
                witness: b.clone(),
            };
            out.push(self.claim(statement, self.eth_asset(), b.account.balance, proof, secret));
        }
        let (secret, st, w) = &self.erc20;
        let proof = ReserveProof::Erc20 { statement: st.clone(), witness: w.clone() };
        out.push(self.claim(statement, self.token_asset(), st.min_amount, proof, secret));
        for (secret, script) in &self.btc {
            let witness = self.utxo_tree.witness_for_script(&self.snapshot, script);
            let total = witness.total();
            let proof = ReserveProof::Btc { statement: self.utxo_tree.statement(total), witness };
            out.push(self.claim(statement, self.btc_asset(), total, proof, secret));
        }
        out
    }

    fn claim(&self, st: &SolvencyStatement, asset: AssetId, amount: Amount, proof: ReserveProof, secret: &[u8; 32]) -> ReserveClaim {
        let ownership = sign_ownership(secret, proof.scheme(), &claim_message(st, &asset)).unwrap();
        ReserveClaim { asset, amount, proof, ownership }
    }

    pub fn witness(&self, statement: &SolvencyStatement) -> SolvencyWitness {
        SolvencyWitness::from_tree(&self.tree, self.claims(statement))
    }
}
