use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ppos_core::attestor::{Attestor, RelationId};
use ppos_core::btcstate::BtcReserveStatement;
use ppos_core::ethstate::{Erc20ReserveStatement, EthReserveStatement};
use ppos_core::liabilities::LiabilityStatement;
use ppos_core::solvency::SolvencyStatement;
use ppos_core::{Reason, RelationVerdict};
use serde::de::DeserializeOwned;

use crate::log::{EventLog, EventPayload, RegistryEvent};
use crate::round::{Round, RoundStatus, Snapshot, Submission};
use crate::RegistryError;

/// The five registry operations, implemented in process by [`Registry`]
/// and over HTTP by [`crate::RegistryClient`].
pub trait RoundRegistry {
    fn open_round(&mut self, snapshot: Snapshot) -> Result<Round, RegistryError>;
    fn submit_liabilities(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError>;
    fn submit_reserve(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError>;
    fn finalize_round(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError>;
    fn get_round(&self, round_id: u64) -> Result<Round, RegistryError>;
    fn list_rounds(&self) -> Result<Vec<Round>, RegistryError>;
}

type Clock = Box<dyn Fn() -> u64 + Send + Sync>;

fn system_clock() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Single-writer registry. Every accepted operation is appended to the log
/// before it changes in-memory state.
pub struct Registry {
    rounds: Vec<Round>,
    events: Vec<RegistryEvent>,
    log: EventLog,
    attestor: Attestor,
    clock: Clock,
}

fn invalid(v: &RelationVerdict) -> RegistryError {
    RegistryError::AttestationInvalid(v.to_string())
}

fn parse<T: DeserializeOwned>(sub: &Submission) -> Result<T, RegistryError> {
    serde_json::from_str(&sub.statement).map_err(|e| RegistryError::AttestationInvalid(format!("statement: {e}")))
}

fn relation_of(sub: &Submission, allowed: &[RelationId]) -> Result<RelationId, RegistryError> {
    let id: RelationId = sub
        .attestation
        .relation
        .parse()
        .map_err(|e| RegistryError::AttestationInvalid(format!("{e}")))?;
    if !allowed.contains(&id) {
        return Err(RegistryError::AttestationInvalid(format!("relation {id} not accepted here")));
    }
    Ok(id)
}

/// Verdicts that say the attestation itself is unusable, as opposed to a
/// relation that was checked and failed.
fn is_structural(reason: Reason) -> bool {
    matches!(reason, Reason::StatementMismatch | Reason::UnknownRelation | Reason::UnknownBackend | Reason::ParseError)
}

impl Registry {
    pub fn in_memory() -> Self {
        Registry {
            rounds: Vec::new(),
            events: Vec::new(),
            log: EventLog::in_memory(),
            attestor: Attestor::default(),
            clock: Box::new(system_clock),
        }
    }

    /// Opens a file-backed registry, replaying any existing events.
    pub fn open(path: &Path) -> Result<Self, RegistryError> {
        let (log, events) = EventLog::open(path)?;
        let mut reg = Registry { log, ..Self::in_memory() };
        for (i, ev) in events.into_iter().enumerate() {
            reg.apply(&ev).map_err(|e| RegistryError::CorruptLog { line: i + 1, reason: e.to_string() })?;
            reg.events.push(ev);
        }
        Ok(reg)
    }

    pub fn with_attestor(mut self, attestor: Attestor) -> Self {
        self.attestor = attestor;
        self
    }

    pub fn with_clock(mut self, clock: impl Fn() -> u64 + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn events(&self) -> &[RegistryEvent] {
        &self.events
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    fn round(&self, round_id: u64) -> Result<&Round, RegistryError> {
        round_id
            .checked_sub(1)
            .and_then(|i| self.rounds.get(i as usize))
            .ok_or(RegistryError::UnknownRound(round_id))
    }

    fn round_in(&self, round_id: u64, want: &RoundStatus, operation: &str) -> Result<&Round, RegistryError> {
        let r = self.round(round_id)?;
        if r.status.rank() != want.rank() {
            return Err(RegistryError::WrongStatus {
                round_id,
                status: r.status.to_string(),
                operation: operation.into(),
            });
        }
        Ok(r)
    }

    /// State transition for one event. Used for live operations after
    /// validation and for replay; checks only what keeps state coherent.
    fn apply(&mut self, ev: &RegistryEvent) -> Result<(), RegistryError> {
        match &ev.payload {
            EventPayload::RoundOpened { snapshot } => {
                if ev.round_id != self.rounds.len() as u64 + 1 {
                    return Err(RegistryError::BadRequest(format!("round {} opened out of order", ev.round_id)));
                }
                if let Some(last) = self.rounds.last() {
                    if !last.status.is_finalized() {
                        return Err(RegistryError::PreviousRoundOpen(last.round_id));
                    }
                }
                self.rounds.push(Round::new(ev.round_id, snapshot.clone()));
            }
            EventPayload::LiabilitiesSubmitted { submission } => {
                self.round_in(ev.round_id, &RoundStatus::Open, "submit liabilities")?;
                let st: LiabilityStatement = parse(submission)?;
                let r = &mut self.rounds[ev.round_id as usize - 1];
                r.liabilities_root = Some(st.root);
                r.liabilities_sum_leaf_index = Some(st.sum_leaf_index);
                r.liability_attestation = Some(submission.clone());
                r.status = RoundStatus::LiabilitiesSet;
            }
            EventPayload::ReserveSubmitted { submission } => {
                self.round_in(ev.round_id, &RoundStatus::LiabilitiesSet, "submit reserve")?;
                self.rounds[ev.round_id as usize - 1].reserve_attestations.push(submission.clone());
            }
            EventPayload::Finalized { submission, accepted, reason } => {
                self.round_in(ev.round_id, &RoundStatus::LiabilitiesSet, "finalize")?;
                let r = &mut self.rounds[ev.round_id as usize - 1];
                r.solvency_attestation = Some(submission.clone());
                r.status = RoundStatus::Finalized { accepted: *accepted, reason: *reason };
            }
        }
        Ok(())
    }

    fn commit(&mut self, round_id: u64, payload: EventPayload) -> Result<Round, RegistryError> {
        let ev = self.log.append(round_id, (self.clock)(), payload)?;
        self.apply(&ev)?;
        self.events.push(ev);
        self.round(round_id).cloned()
    }

    fn check_reserve_snapshot(&self, round: &Round, id: RelationId, sub: &Submission) -> Result<(), RegistryError> {
        let mismatch = |what: &str| RegistryError::SnapshotMismatch(format!("{id}: {what}"));
        match id {
            RelationId::EthReserve | RelationId::Erc20Reserve => {
                let block = if id == RelationId::EthReserve {
                    parse::<EthReserveStatement>(sub)?.block_hash
                } else {
                    parse::<Erc20ReserveStatement>(sub)?.block_hash
                };
                match round.snapshot.eth_block_hash {
                    Some(h) if h == block => Ok(()),
                    Some(h) => Err(mismatch(&format!("block {block} is not the round's block {h}"))),
                    None => Err(mismatch("round has no ethereum snapshot")),
                }
            }
            RelationId::BtcReserve => {
                let st: BtcReserveStatement = parse(sub)?;
                match &round.snapshot.btc {
                    Some(c) if c.utxo_root == st.utxo_root && c.snapshot_block == st.snapshot_block => Ok(()),
                    Some(_) => Err(mismatch("utxo commitment is not the round's")),
                    None => Err(mismatch("round has no bitcoin snapshot")),
                }
            }
            _ => unreachable!("only reserve relations reach here"),
        }
    }

    /// Re-verifies every stored attestation. Returns `(round, problem)` for
    /// each one whose verdict differs from what the round records.
    pub fn audit(&self) -> Vec<(u64, String)> {
        let mut problems = Vec::new();
        for r in &self.rounds {
            let mut expect = |sub: &Submission, accepted: bool, what: &str| {
                let v = sub.verify(&self.attestor);
                if v.accepted != accepted {
                    problems.push((r.round_id, format!("{what}: {v}")));
                }
            };
            if let Some(s) = &r.liability_attestation {
                expect(s, true, "liabilities");
            }
            for (i, s) in r.reserve_attestations.iter().enumerate() {
                expect(s, true, &format!("reserve {i}"));
            }
            if let (Some(s), RoundStatus::Finalized { accepted, .. }) = (&r.solvency_attestation, &r.status) {
                expect(s, *accepted, "solvency");
            }
        }
        problems
    }
}

impl RoundRegistry for Registry {
    fn open_round(&mut self, snapshot: Snapshot) -> Result<Round, RegistryError> {
        if let Some(last) = self.rounds.last() {
            if !last.status.is_finalized() {
                return Err(RegistryError::PreviousRoundOpen(last.round_id));
            }
        }
        let round_id = self.rounds.len() as u64 + 1;
        self.commit(round_id, EventPayload::RoundOpened { snapshot })
    }

    fn submit_liabilities(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError> {
        self.round_in(round_id, &RoundStatus::Open, "submit liabilities")?;
        relation_of(&submission, &[RelationId::Liability])?;
        let v = submission.verify(&self.attestor);
        if !v.accepted {
            return Err(invalid(&v));
        }
        self.commit(round_id, EventPayload::LiabilitiesSubmitted { submission })
    }

    fn submit_reserve(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError> {
        let round = self.round_in(round_id, &RoundStatus::LiabilitiesSet, "submit reserve")?;
        let id = relation_of(&submission, &[RelationId::EthReserve, RelationId::Erc20Reserve, RelationId::BtcReserve])?;
        if round.reserve_attestations.contains(&submission) {
            return Err(RegistryError::AttestationInvalid("DuplicateAttestation: already submitted".into()));
        }
        let v = submission.verify(&self.attestor);
        if !v.accepted {
            return Err(invalid(&v));
        }
        self.check_reserve_snapshot(round, id, &submission)?;
        self.commit(round_id, EventPayload::ReserveSubmitted { submission })
    }

    fn finalize_round(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError> {
        let round = self.round_in(round_id, &RoundStatus::LiabilitiesSet, "finalize")?;
        relation_of(&submission, &[RelationId::Solvency])?;
        let st: SolvencyStatement = parse(&submission)?;
        let bind = |what: &str| RegistryError::BindingMismatch(what.to_string());
        if st.round_id != round_id {
            return Err(bind(&format!("statement is for round {}", st.round_id)));
        }
        if Some(st.liabilities_root) != round.liabilities_root {
            return Err(bind("liabilities root differs from the submitted one"));
        }
        if Some(st.liabilities_sum_leaf_index) != round.liabilities_sum_leaf_index {
            return Err(bind("sum leaf index differs from the submitted one"));
        }
        if st.eth_block_hash != round.snapshot.eth_block_hash || st.btc != round.snapshot.btc {
            return Err(bind("chain commitments differ from the round snapshot"));
        }
        let v = submission.verify(&self.attestor);
        if !v.accepted && is_structural(v.reason) {
            return Err(invalid(&v));
        }
        self.commit(round_id, EventPayload::Finalized { submission, accepted: v.accepted, reason: v.reason })
    }

    fn get_round(&self, round_id: u64) -> Result<Round, RegistryError> {
        self.round(round_id).cloned()
    }

    fn list_rounds(&self) -> Result<Vec<Round>, RegistryError> {
        Ok(self.rounds.clone())
    }
}
