//! In-memory Ethereum state built with an independent trie implementation,
//! answering `eth_getProof`-shaped queries.

use std::collections::BTreeMap;
use std::sync::Arc;

use eth_trie::{EthTrie, MemoryDB, Trie};
use ppos_core::ethstate::AccountState;
use ppos_core::hashcodec::{keccak256, EMPTY_CODE_HASH, EMPTY_TRIE_ROOT};
use ppos_core::{hexfmt, Amount, Digest32, RlpItem};
use ppos_rpc::{ProofResponse, StorageProofResponse};

#[derive(Debug, Clone, Default)]
pub struct AccountSpec {
    pub nonce: u64,
    pub balance: Amount,
    pub code_hash: Option<Digest32>,
    pub storage: BTreeMap<[u8; 32], Amount>,
}

impl AccountSpec {
    pub fn eoa(balance: Amount) -> Self {
        AccountSpec { balance, ..Default::default() }
    }
}

pub struct BuiltState {
    trie: EthTrie<MemoryDB>,
    root: Digest32,
    accounts: BTreeMap<[u8; 20], AccountState>,
    storage: BTreeMap<[u8; 20], (EthTrie<MemoryDB>, BTreeMap<[u8; 32], Amount>)>,
}

fn new_trie() -> EthTrie<MemoryDB> {
    EthTrie::new(Arc::new(MemoryDB::new(true)))
}

fn root_of(trie: &mut EthTrie<MemoryDB>) -> Digest32 {
    Digest32(trie.root_hash().expect("in-memory trie").0)
}

pub fn build_state(accounts: &BTreeMap<[u8; 20], AccountSpec>) -> BuiltState {
    let mut trie = new_trie();
    let mut states = BTreeMap::new();
    let mut storage = BTreeMap::new();
    for (addr, spec) in accounts {
        let mut storage_root = EMPTY_TRIE_ROOT;
        let live: BTreeMap<[u8; 32], Amount> =
            spec.storage.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, *v)).collect();
        if !live.is_empty() {
            let mut st = new_trie();
            for (slot, value) in &live {
                st.insert(keccak256(slot).as_ref(), &RlpItem::u256(value.value()).encode()).expect("insert");
            }
            storage_root = root_of(&mut st);
            storage.insert(*addr, (st, live));
        }
        let account = AccountState {
            nonce: spec.nonce,
            balance: spec.balance,
            storage_root,
            code_hash: spec.code_hash.unwrap_or(EMPTY_CODE_HASH),
        };
        trie.insert(keccak256(addr).as_ref(), &account.to_rlp()).expect("insert");
        states.insert(*addr, account);
    }
    let root = root_of(&mut trie);
    BuiltState { trie, root, accounts: states, storage }
}

fn hex_nodes(nodes: Vec<Vec<u8>>) -> Vec<String> {
    nodes.iter().map(hexfmt::encode).collect()
}

impl BuiltState {
    pub fn state_root(&self) -> Digest32 {
        self.root
    }

    pub fn account(&self, address: &[u8; 20]) -> Option<&AccountState> {
        self.accounts.get(address)
    }

    /// The response a node would give for `eth_getProof(address, slots)`.
    pub fn proof(&mut self, address: &[u8; 20], slots: &[[u8; 32]]) -> ProofResponse {
        let account = self.accounts.get(address).cloned().unwrap_or(AccountState {
            nonce: 0,
            balance: Amount::ZERO,
            storage_root: EMPTY_TRIE_ROOT,
            code_hash: EMPTY_CODE_HASH,
        });
        let account_proof = self.trie.get_proof(keccak256(address).as_ref()).expect("proof");
        let storage_proof = slots
            .iter()
            .map(|slot| {
                let (proof, value) = match self.storage.get_mut(address) {
                    Some((st, values)) => (
                        st.get_proof(keccak256(slot).as_ref()).expect("proof"),
                        values.get(slot).copied().unwrap_or(Amount::ZERO),
                    ),
                    None => (Vec::new(), Amount::ZERO),
                };
                StorageProofResponse {
                    key: hexfmt::encode(slot),
                    value: value.to_hex_quantity(),
                    proof: hex_nodes(proof),
                }
            })
            .collect();
        ProofResponse {
            address: hexfmt::encode(address),
            account_proof: hex_nodes(account_proof),
            balance: account.balance.to_hex_quantity(),
            code_hash: account.code_hash.to_hex(),
            nonce: format!("{:#x}", account.nonce),
            storage_hash: account.storage_root.to_hex(),
            storage_proof,
        }
    }
}
