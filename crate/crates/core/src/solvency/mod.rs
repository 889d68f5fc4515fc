//! Solvency: reserves per asset against the liabilities totals leaf, with
//! reserve ownership bound to the round by signatures.

mod ownership;
mod relation;

pub use ownership::*;
pub use relation::*;
