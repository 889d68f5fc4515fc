//! Round registry: opens solvency rounds, accepts liability, reserve and
//! solvency attestations in order, and persists every change as a
//! hash-chained event log that replays to the same state.

mod error;
pub mod http;
pub mod log;
mod registry;
mod round;

pub use error::RegistryError;
pub use http::{serve, RegistryClient, ServerHandle};
pub use log::{EventLog, EventPayload, RegistryEvent};
pub use registry::{Registry, RoundRegistry};
pub use round::{Round, RoundStatus, Snapshot, Submission};
