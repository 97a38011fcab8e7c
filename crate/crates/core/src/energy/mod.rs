//! Energy-cost primitives and the constructions relating energy cost to
//! external information cost.
//!
//! [`brw_to_top`] climbs an integer line by a random walk whose steps are
//! bits sent over a slightly biased channel, paying bounded expected energy
//! for a doubling. [`unbiased_walk`] runs the same walk over a useless
//! channel for free. [`sample_with_prior`] combines the two to send a bit
//! whose law the receiver already approximately knows, and
//! [`NoisySimulator`] does that for every bit of a noiseless protocol.
//! [`noiseless_from_noisy`] goes the other way.

mod equiv;
mod prior;
mod walk;

pub use equiv::{
    distributional_energy_cost, noiseless_from_noisy, posterior_q, NoisyRun, NoisySimulator,
};
pub use prior::{sample_with_prior, BitWithPrior, PriorCase};
pub use walk::{
    brw_to_top, brw_with_limits, climb, unbiased_walk, unbiased_with_limits, Grid, WalkLimits,
    WalkOutcome, DIRECT_GAP,
};
