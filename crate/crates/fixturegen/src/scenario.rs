//! Loads the pinned devnet scenario and assembles relation instances from
//! it: the liabilities tree, one reserve instance per custodian, and the
//! solvency statement and witness for a round.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use ppos_core::attestor::{canonical_bytes, RelationId};
use ppos_core::btcstate::{build_utxo_tree, ingest_chainstate, UtxoSnapshot, UtxoTree};
use ppos_core::ethstate::{AccountProofBundle, Erc20ReserveStatement, Erc20Witness, EthReserveStatement};
use ppos_core::liabilities::{AssetId, LiabilityTree, UserInput};
use ppos_core::solvency::{
    claim_message, sign_ownership, BtcCommitment, ReserveClaim, ReserveProof, SolvencyStatement, SolvencyWitness,
};
use ppos_core::Amount;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::devnet::DevnetKeys;
use crate::GenError;

/// Seed for the per-user salts of the scenario's liabilities tree.
pub const SALT_SEED: u64 = 11;

/// The repository's pinned fixtures directory.
pub fn pinned_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn parse_err(what: &str, e: impl std::fmt::Display) -> GenError {
    GenError::Source(format!("{what}: {e}"))
}

pub fn read_bundle(path: &Path) -> Result<AccountProofBundle, GenError> {
    Ok(ppos_rpc::load_fixture(path)?.bundle)
}

pub fn read_users(path: &Path) -> Result<Vec<UserInput>, GenError> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| parse_err("users", e)))
        .collect()
}

pub fn salted_tree(users: &[UserInput], seed: u64) -> Result<LiabilityTree, GenError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let leaves = users
        .iter()
        .map(|u| u.to_leaf(rng.gen()).map_err(|e| parse_err(&u.user_id, e)))
        .collect::<Result<Vec<_>, _>>()?;
    LiabilityTree::build(leaves).map_err(|e| parse_err("tree", e))
}

/// One relation instance in attestor input form.
#[derive(Debug, Clone)]
pub struct Instance {
    pub relation: RelationId,
    pub statement: Vec<u8>,
    pub witness: Vec<u8>,
}

impl Instance {
    fn new<S: serde::Serialize, W: serde::Serialize>(relation: RelationId, st: &S, w: &W) -> Self {
        Instance { relation, statement: canonical_bytes(st), witness: canonical_bytes(w) }
    }
}

pub struct Scenario {
    pub keys: DevnetKeys,
    pub users: Vec<UserInput>,
    pub tree: LiabilityTree,
    pub eth: Vec<AccountProofBundle>,
    pub erc20_statement: Erc20ReserveStatement,
    pub erc20_witness: Erc20Witness,
    pub snapshot: UtxoSnapshot,
    pub utxo_tree: UtxoTree,
}

impl Scenario {
    pub fn pinned() -> Result<Self, GenError> {
        Self::load(&pinned_root())
    }

    pub fn load(root: &Path) -> Result<Self, GenError> {
        let keys: DevnetKeys = serde_json::from_str(&std::fs::read_to_string(root.join("devnet-keys.json"))?)
            .map_err(|e| parse_err("keys", e))?;
        let users = read_users(&root.join(&keys.users))?;
        Self::assemble(root, keys, users)
    }

    /// Same reserves, different liabilities.
    pub fn with_users(&self, users: Vec<UserInput>) -> Result<Self, GenError> {
        let tree = salted_tree(&users, SALT_SEED)?;
        Ok(Scenario {
            keys: self.keys.clone(),
            users,
            tree,
            eth: self.eth.clone(),
            erc20_statement: self.erc20_statement.clone(),
            erc20_witness: self.erc20_witness.clone(),
            snapshot: self.snapshot.clone(),
            utxo_tree: build_utxo_tree(&self.snapshot)?,
        })
    }

    fn assemble(root: &Path, keys: DevnetKeys, users: Vec<UserInput>) -> Result<Self, GenError> {
        let tree = salted_tree(&users, SALT_SEED)?;
        let eth = keys
            .eth_custodians
            .iter()
            .map(|c| read_bundle(&root.join(&c.fixture)))
            .collect::<Result<Vec<_>, _>>()?;
        let bundle = read_bundle(&root.join(&keys.token.fixture))?;
        let sp = bundle.storage_proofs.first().ok_or_else(|| parse_err("erc20 fixture", "no storage proof"))?;
        let erc20_statement = Erc20ReserveStatement {
            min_amount: sp.value,
            block_hash: bundle.block_hash,
            token_contract: bundle.address,
            mapping_slot: Amount::from_u64(keys.token.mapping_slot),
        };
        let erc20_witness = Erc20Witness { bundle, holder: keys.token.holder };
        let file = std::fs::File::open(root.join(&keys.chainstate))?;
        let snapshot = ingest_chainstate(BufReader::new(file))?;
        let utxo_tree = build_utxo_tree(&snapshot)?;
        Ok(Scenario { keys, users, tree, eth, erc20_statement, erc20_witness, snapshot, utxo_tree })
    }

    pub fn eth_asset(&self) -> AssetId {
        AssetId::native(self.keys.eth_network.clone()).expect("valid network tag")
    }

    pub fn token_asset(&self) -> AssetId {
        AssetId::new(self.keys.eth_network.clone(), self.keys.token.contract).expect("valid network tag")
    }

    pub fn btc_asset(&self) -> AssetId {
        AssetId::native(self.keys.btc_network.clone()).expect("valid network tag")
    }

    pub fn btc_commitment(&self) -> BtcCommitment {
        BtcCommitment { utxo_root: self.utxo_tree.root(), snapshot_block: self.utxo_tree.snapshot_block() }
    }

    pub fn liability_instance(&self) -> Instance {
        Instance::new(RelationId::Liability, &self.tree.statement(), &self.tree.witness())
    }

    /// Inner reserve proofs, one per custodian, each for the full balance.
    pub fn reserve_proofs(&self) -> Vec<(AssetId, ReserveProof, [u8; 32])> {
        let mut out = Vec::new();
        for (c, b) in self.keys.eth_custodians.iter().zip(&self.eth) {
            let statement = EthReserveStatement { min_amount: b.account.balance, block_hash: b.block_hash };
            out.push((self.eth_asset(), ReserveProof::Eth { statement, witness: b.clone() }, c.secret));
        }
        out.push((
            self.token_asset(),
            ReserveProof::Erc20 { statement: self.erc20_statement.clone(), witness: self.erc20_witness.clone() },
            self.keys.token.holder_secret,
        ));
        for c in &self.keys.btc_custodians {
            let witness = self.utxo_tree.witness_for_script(&self.snapshot, &c.script);
            let statement = self.utxo_tree.statement(witness.total());
            out.push((self.btc_asset(), ReserveProof::Btc { statement, witness }, c.secret));
        }
        out
    }

    pub fn reserve_instances(&self) -> Vec<Instance> {
        self.reserve_proofs()
            .into_iter()
            .map(|(_, p, _)| match p {
                ReserveProof::Eth { statement, witness } => Instance::new(RelationId::EthReserve, &statement, &witness),
                ReserveProof::Erc20 { statement, witness } => {
                    Instance::new(RelationId::Erc20Reserve, &statement, &witness)
                }
                ReserveProof::Btc { statement, witness } => Instance::new(RelationId::BtcReserve, &statement, &witness),
            })
            .collect()
    }

    pub fn solvency_statement(&self, round_id: u64) -> SolvencyStatement {
        SolvencyStatement {
            round_id,
            liabilities_root: self.tree.root(),
            liabilities_sum_leaf_index: self.tree.sum_leaf_index() as u64,
            eth_block_hash: Some(self.keys.block_hash),
            btc: Some(self.btc_commitment()),
        }
    }

    pub fn claims(&self, statement: &SolvencyStatement) -> Result<Vec<ReserveClaim>, GenError> {
        self.reserve_proofs()
            .into_iter()
            .map(|(asset, proof, secret)| {
                let amount = match &proof {
                    ReserveProof::Eth { statement, .. } => statement.min_amount,
                    ReserveProof::Erc20 { statement, .. } => statement.min_amount,
                    ReserveProof::Btc { statement, .. } => statement.min_amount,
                };
                let ownership = sign_ownership(&secret, proof.scheme(), &claim_message(statement, &asset))
                    .map_err(|e| GenError::Check(e.to_string()))?;
                Ok(ReserveClaim { asset, amount, proof, ownership })
            })
            .collect()
    }

    pub fn solvency_witness(&self, statement: &SolvencyStatement) -> Result<SolvencyWitness, GenError> {
        Ok(SolvencyWitness::from_tree(&self.tree, self.claims(statement)?))
    }

    pub fn solvency_instance(&self, round_id: u64) -> Result<Instance, GenError> {
        let st = self.solvency_statement(round_id);
        Ok(Instance::new(RelationId::Solvency, &st, &self.solvency_witness(&st)?))
    }
}
