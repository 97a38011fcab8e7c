//! Two-party protocols over binary symmetric channels with feedback.
//!
//! This module holds the domain model shared by every other part of the
//! crate: protocol trees ([`ProtocolSpec`]), received transcripts, per-party
//! error counts, the four independent randomness streams of an execution,
//! and the bit/energy ledger. [`run_over_bsc`] is the reference executor
//! that the compressor and the energy constructions are checked against.

mod channel;
mod ledger;
mod rng;
mod spec;
mod transcript;

pub use channel::{
    bit_energy, count_errors, run_over_bsc, run_variable_noise, ErrorCounts, Execution, Noise,
};
pub use ledger::CostLedger;
pub use rng::RandomSource;
pub use spec::{NodeRule, Party, ProtocolSpec, SpecFile, TableBuilder, Walker};
pub use transcript::Transcript;
