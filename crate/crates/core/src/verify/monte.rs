use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::class::ClassLaw;
use crate::compressor::{
    validate_params, Branch, ChunkContext, ChunkParams, Compressor, CompressorConfig,
    DEFAULT_ITERATION_CAP,
};
use crate::error::{Error, Result};
use crate::protocol::{ProtocolSpec, RandomSource};

/// Largest chunk depth for which trials share a precomputed leaf table.
const LEAF_TABLE_GAMMA: usize = 22;

/// Aggregate of independent seeded chunk samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloChunk {
    pub trials: u64,
    pub base_seed: u64,
    /// Row-major class counts, as in [`ClassLaw`].
    pub counts: Vec<u64>,
    pub law: ClassLaw,
    pub mean_bits: f64,
    pub p95_bits: u64,
    pub low_trials: u64,
    pub high_trials: u64,
    /// Rejection rounds per trial, by branch.
    pub low_rounds: BTreeMap<u64, u64>,
    pub high_rounds: BTreeMap<u64, u64>,
    pub threshold_calls: u64,
    pub threshold_rounds: u64,
    /// Trials that aborted, with their error.
    pub failures: Vec<(u64, String)>,
}

fn mean_of(hist: &BTreeMap<u64, u64>) -> f64 {
    let n: u64 = hist.values().sum();
    if n == 0 {
        return f64::NAN;
    }
    hist.iter().map(|(k, v)| (k * v) as f64).sum::<f64>() / n as f64
}

impl MonteCarloChunk {
    pub fn mean_low_rounds(&self) -> f64 {
        mean_of(&self.low_rounds)
    }

    pub fn mean_high_rounds(&self) -> f64 {
        mean_of(&self.high_rounds)
    }

    /// Mean rounds of one threshold invocation.
    pub fn mean_threshold_rounds(&self) -> f64 {
        if self.threshold_calls == 0 {
            0.0
        } else {
            self.threshold_rounds as f64 / self.threshold_calls as f64
        }
    }
}

/// Class counts, branch, then branch rounds, bits, threshold calls and
/// threshold rounds of one chunk.
type TrialStats = (usize, usize, Branch, u64, u64, u64, u64);

struct Trial {
    seed: u64,
    outcome: std::result::Result<TrialStats, String>,
}

/// Draws `n` chunks of depth `params.gamma` at the root of `spec` with
/// inputs `(x, y)`; trial `i` uses seed `base_seed + i`.
pub fn monte_carlo_chunk(
    params: &ChunkParams,
    spec: &ProtocolSpec,
    x: usize,
    y: usize,
    n: u64,
    base_seed: u64,
) -> Result<MonteCarloChunk> {
    validate_params(params).into_result()?;
    if spec.rounds() < params.gamma {
        return Err(Error::Parameter(format!(
            "protocol has {} rounds, chunk needs {}",
            spec.rounds(),
            params.gamma
        )));
    }
    let ctx = if params.gamma <= LEAF_TABLE_GAMMA {
        ChunkContext::cached(spec.walker(), x, y, params.gamma)?
    } else {
        ChunkContext::new(spec.walker(), x, y)
    };
    let config = CompressorConfig {
        beta: params.beta,
        iteration_cap: DEFAULT_ITERATION_CAP,
    };
    let trials: Vec<Trial> = (0..n)
        .into_par_iter()
        .map_init(
            || Compressor::new(config),
            |compressor, i| {
                let seed = base_seed.wrapping_add(i);
                let mut rng = RandomSource::new(seed);
                let outcome = compressor
                    .simulate_chunk(&ctx, params, &mut rng)
                    .map(|o| {
                        (
                            o.errors.m_x,
                            o.errors.m_y,
                            o.branch,
                            o.rounds,
                            o.ledger.bits_sent,
                            o.threshold_calls,
                            o.threshold_rounds,
                        )
                    })
                    .map_err(|e| e.to_string());
                Trial { seed, outcome }
            },
        )
        .collect();

    let half = params.half();
    let mut law = ClassLaw::zeros(half);
    let mut counts = vec![0u64; law.probs.len()];
    let mut bits = Vec::with_capacity(trials.len());
    let mut out = MonteCarloChunk {
        trials: n,
        base_seed,
        counts: Vec::new(),
        law: ClassLaw::zeros(half),
        mean_bits: 0.0,
        p95_bits: 0,
        low_trials: 0,
        high_trials: 0,
        low_rounds: BTreeMap::new(),
        high_rounds: BTreeMap::new(),
        threshold_calls: 0,
        threshold_rounds: 0,
        failures: Vec::new(),
    };
    for t in trials {
        match t.outcome {
            Ok((m_x, m_y, branch, rounds, b, calls, th_rounds)) => {
                counts[law.index(m_x, m_y)] += 1;
                bits.push(b);
                let hist = match branch {
                    Branch::Low => {
                        out.low_trials += 1;
                        &mut out.low_rounds
                    }
                    _ => {
                        out.high_trials += 1;
                        &mut out.high_rounds
                    }
                };
                *hist.entry(rounds).or_default() += 1;
                out.threshold_calls += calls;
                out.threshold_rounds += th_rounds;
            }
            Err(e) => out.failures.push((t.seed, e)),
        }
    }
    law = ClassLaw::from_counts(half, &counts);
    bits.sort_unstable();
    if !bits.is_empty() {
        out.mean_bits = bits.iter().sum::<u64>() as f64 / bits.len() as f64;
        let rank = ((0.95 * bits.len() as f64).ceil() as usize).clamp(1, bits.len());
        out.p95_bits = bits[rank - 1];
    }
    out.counts = counts;
    out.law = law;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{chi_square_gof, exact_chunk_distribution, SIGNIFICANCE};

    #[test]
    fn small_chunk_matches_exact_law() {
        let params = ChunkParams::with_gamma(0.1, 8).with_minimal_t();
        let spec = ProtocolSpec::seeded(8, 2, 2, 5);
        let mc = monte_carlo_chunk(&params, &spec, 1, 0, 4000, 11).unwrap();
        assert!(mc.failures.is_empty());
        assert_eq!(mc.counts.iter().sum::<u64>(), 4000);
        let exact = exact_chunk_distribution(&params).unwrap();
        assert!(chi_square_gof(&mc.counts, &exact.law.probs, SIGNIFICANCE).pass);
        assert!(mc.mean_threshold_rounds() <= 2.0);
        assert!(mc.p95_bits as f64 >= mc.mean_bits * 0.5);
    }

    #[test]
    fn reproducible_from_seed() {
        let params = ChunkParams::with_gamma(0.1, 6).with_minimal_t();
        let spec = ProtocolSpec::xor(6, 2, 2);
        let a = monte_carlo_chunk(&params, &spec, 0, 1, 300, 3).unwrap();
        let b = monte_carlo_chunk(&params, &spec, 0, 1, 300, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn short_protocol_is_rejected() {
        let params = ChunkParams::with_gamma(0.1, 8);
        let spec = ProtocolSpec::xor(4, 2, 2);
        assert!(monte_carlo_chunk(&params, &spec, 0, 0, 10, 0).is_err());
    }
}
