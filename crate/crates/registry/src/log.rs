//! Append-only event log, one JSON record per line. Each record's digest
//! covers its body and the previous record's digest, so editing, dropping
//! or reordering any line breaks the chain from that line on.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ppos_core::hashcodec::keccak256_concat;
use ppos_core::{Digest32, Reason};
use serde::{Deserialize, Serialize};

use crate::round::{Snapshot, Submission};
use crate::RegistryError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventPayload {
    RoundOpened { snapshot: Snapshot },
    LiabilitiesSubmitted { submission: Submission },
    ReserveSubmitted { submission: Submission },
    Finalized { submission: Submission, accepted: bool, reason: Reason },
}

#[derive(Serialize)]
struct EventBody<'a> {
    seq: u64,
    round_id: u64,
    timestamp: u64,
    #[serde(flatten)]
    payload: &'a EventPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEvent {
    pub seq: u64,
    pub round_id: u64,
    /// Unix seconds at append time.
    pub timestamp: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
    pub digest: Digest32,
}

impl RegistryEvent {
    fn body_digest(seq: u64, round_id: u64, timestamp: u64, payload: &EventPayload, prev: &Digest32) -> Digest32 {
        let body = serde_json::to_vec(&EventBody { seq, round_id, timestamp, payload }).expect("events serialize");
        keccak256_concat(&[prev.as_ref(), &body])
    }

    pub fn seal(seq: u64, round_id: u64, timestamp: u64, payload: EventPayload, prev: &Digest32) -> Self {
        let digest = Self::body_digest(seq, round_id, timestamp, &payload, prev);
        RegistryEvent { seq, round_id, timestamp, payload, digest }
    }

    pub fn chains_from(&self, prev: &Digest32) -> bool {
        Self::body_digest(self.seq, self.round_id, self.timestamp, &self.payload, prev) == self.digest
    }
}

pub struct EventLog {
    file: Option<File>,
    head: Digest32,
    len: u64,
}

impl EventLog {
    pub fn in_memory() -> Self {
        EventLog { file: None, head: Digest32::ZERO, len: 0 }
    }

    /// Opens (creating if absent) a log file and returns its verified
    /// events. Any line that fails to parse or to chain is an error.
    pub fn open(path: &Path) -> Result<(Self, Vec<RegistryEvent>), RegistryError> {
        let mut events = Vec::new();
        let mut head = Digest32::ZERO;
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line_no = i + 1;
                let line = line?;
                let corrupt = |reason: String| RegistryError::CorruptLog { line: line_no, reason };
                let ev: RegistryEvent = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                if ev.seq != events.len() as u64 + 1 {
                    return Err(corrupt(format!("sequence {} where {} expected", ev.seq, events.len() + 1)));
                }
                if !ev.chains_from(&head) {
                    return Err(corrupt("digest does not match the record".into()));
                }
                head = ev.digest;
                events.push(ev);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let len = events.len() as u64;
        Ok((EventLog { file: Some(file), head, len }, events))
    }

    pub fn next_seq(&self) -> u64 {
        self.len + 1
    }

    /// Seals and durably writes one event.
    pub fn append(&mut self, round_id: u64, timestamp: u64, payload: EventPayload) -> Result<RegistryEvent, RegistryError> {
        let ev = RegistryEvent::seal(self.next_seq(), round_id, timestamp, payload, &self.head);
        if let Some(f) = &mut self.file {
            let mut line = serde_json::to_string(&ev).expect("events serialize");
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.sync_data()?;
        }
        self.head = ev.digest;
        self.len += 1;
        Ok(ev)
    }
}
