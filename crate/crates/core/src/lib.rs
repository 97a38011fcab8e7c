//! Simulation and verification of interactive communication over binary
//! symmetric channels with feedback.
//!
//! * [`protocol`]: protocol trees, the reference noisy executor, ledgers.
//! * [`compressor`]: simulates a fixed-noise protocol over a noiseless
//!   channel by chunked, recursive rejection sampling.
//! * [`energy`]: random-walk primitives and the two constructions relating
//!   energy cost to external information cost.
//! * [`infotheory`]: exact entropies, divergences and information costs.
//! * [`verify`]: exact class-law oracles, goodness-of-fit tests and the
//!   acceptance battery.
//! * [`report`]: the JSON/CSV experiment record.

pub mod compressor;
pub mod energy;
pub mod error;
pub mod infotheory;
pub mod protocol;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use protocol::{
    bit_energy, run_over_bsc, CostLedger, ErrorCounts, Noise, Party, ProtocolSpec, RandomSource,
    Transcript,
};
