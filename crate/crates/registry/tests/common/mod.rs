#![allow(dead_code)]

use std::sync::OnceLock;

use ppos_core::attestor::{self, RelationId};
use ppos_fixturegen::scenario::{Instance, Scenario};
use ppos_registry::{Snapshot, Submission};

pub fn scenario() -> &'static Scenario {
    static S: OnceLock<Scenario> = OnceLock::new();
    S.get_or_init(|| Scenario::pinned().expect("pinned fixtures load"))
}

pub fn submit(inst: &Instance) -> Submission {
    let att = attestor::prove(inst.relation.as_str(), &inst.statement, &inst.witness).expect("instance proves");
    Submission::new(&inst.statement, att)
}

pub fn snapshot() -> Snapshot {
    let s = scenario();
    Snapshot { eth_block_hash: Some(s.keys.block_hash), btc: Some(s.btc_commitment()) }
}

pub fn liabilities() -> Submission {
    static L: OnceLock<Submission> = OnceLock::new();
    L.get_or_init(|| submit(&scenario().liability_instance())).clone()
}

/// Two ether, one token and two bitcoin reserve submissions.
pub fn reserves() -> Vec<Submission> {
    static R: OnceLock<Vec<Submission>> = OnceLock::new();
    R.get_or_init(|| scenario().reserve_instances().iter().map(submit).collect()).clone()
}

pub fn reserve(relation: RelationId) -> Submission {
    reserves().into_iter().find(|s| s.attestation.relation == relation.as_str()).expect("relation present")
}

pub fn solvency(round_id: u64) -> Submission {
    submit(&scenario().solvency_instance(round_id).expect("solvency instance"))
}

pub fn fixed_clock() -> impl Fn() -> u64 + Send + Sync + 'static {
    || 1_700_000_000
}
