//! Evaluate agents against explicit task distributions under resource
//! budgets, decide quantitative generality axioms with confidence
//! intervals, and construct the distribution shifts, worst cases and
//! information bounds that make such verdicts distribution-relative.

pub mod agents;
pub mod ecologies;
pub mod error;
pub mod interaction;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub mod axioms;
pub mod distances;
pub mod functionals;
pub mod adversary;
pub mod inference;
pub mod harness;
