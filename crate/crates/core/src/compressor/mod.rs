//! Simulation of a noisy-channel protocol by a public-coin protocol over a
//! noiseless channel.
//!
//! The rounds are split into chunks of depth `gamma`. Each chunk draws a
//! public coin deciding whether its error count is at most `floor(theta)`,
//! then samples a leaf by rejection: from a nested simulation at twice the
//! advantage in the low branch, uniformly in the high branch. Both parties
//! learn which side of the budget a candidate lies on through the
//! [`threshold`] protocol, which costs four bits per round and needs two
//! rounds on average. The output law is exactly the noisy channel's.

mod chunk;
mod counts;
mod params;
mod simulate;
mod threshold;

pub use chunk::{
    direct, Branch, ChunkContext, ChunkOutcome, Compressor, CompressorConfig, LeafCache,
    MAX_CACHED_GAMMA,
};
pub use counts::{ln_binomial_pmf, log_sum_exp, CountDistribution, ProductCountDistribution};
pub use params::{
    low_error_mass, validate_chunk, validate_params, ChunkParams, Validation, DEFAULT_BETA,
    DEFAULT_ITERATION_CAP, MIN_LOW_RATIO,
};
pub use simulate::{
    simulate_noiseless, simulate_noiseless_with, validate_run, ChunkSummary, Simulation,
    SimulationOptions,
};
pub use threshold::{find_xi, threshold, ThresholdPlan, ThresholdResult, BITS_PER_ROUND};
