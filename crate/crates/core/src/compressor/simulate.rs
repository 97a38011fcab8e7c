use serde::{Deserialize, Serialize};

use super::chunk::{direct, Branch, ChunkContext, Compressor, CompressorConfig};
use super::params::{validate_params, ChunkParams, Validation};
use crate::error::{Error, Result};
use crate::protocol::{CostLedger, ErrorCounts, ProtocolSpec, RandomSource, Transcript};

/// Overrides for the top-level chunk parameters. Unset fields take the
/// defaults for the run's noise level. Nested levels always use defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub gamma: Option<usize>,
    pub theta: Option<f64>,
    pub t: Option<f64>,
    pub beta: Option<f64>,
    pub iteration_cap: Option<u64>,
}

impl SimulationOptions {
    fn config(&self) -> CompressorConfig {
        let d = CompressorConfig::default();
        CompressorConfig {
            beta: self.beta.unwrap_or(d.beta),
            iteration_cap: self.iteration_cap.unwrap_or(d.iteration_cap),
        }
    }

    /// Parameters of a top-level chunk of depth `len`.
    pub fn chunk_params(&self, epsilon: f64, len: Option<usize>) -> ChunkParams {
        let full = self
            .gamma
            .unwrap_or_else(|| ChunkParams::default_gamma(epsilon));
        let gamma = len.unwrap_or(full);
        let mut p = ChunkParams::with_gamma(epsilon, gamma).with_beta(self.config().beta);
        if gamma == full {
            if let Some(theta) = self.theta {
                p = p.with_theta(theta);
            }
        }
        if let Some(t) = self.t {
            p = p.with_t(t);
        }
        p
    }
}

/// Per-chunk record of a compressed run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkSummary {
    pub start: usize,
    pub len: usize,
    pub errors: ErrorCounts,
    pub branch: Branch,
    pub rounds: u64,
    pub bits: u64,
}

/// Output of [`simulate_noiseless`].
#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    /// Transcript of the original protocol, padding removed.
    pub transcript: Transcript,
    /// Transcript of the padded alternating protocol.
    pub padded: Transcript,
    pub ledger: CostLedger,
    pub chunks: Vec<ChunkSummary>,
    pub validation: Validation,
}

impl Simulation {
    pub fn is_direct(&self) -> bool {
        self.validation.base_case
    }
}

/// Simulates `spec` over a channel with advantage `epsilon` using only
/// noiseless bits and public coins, with default parameters.
pub fn simulate_noiseless(
    spec: &ProtocolSpec,
    x: usize,
    y: usize,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<Simulation> {
    simulate_noiseless_with(spec, x, y, epsilon, &SimulationOptions::default(), rng)
}

/// Checks every level the run can reach: the top-level chunk and the
/// default chunks at `2 eps, 4 eps, ...` until the base case.
pub fn validate_run(epsilon: f64, options: &SimulationOptions) -> Validation {
    let top = options.chunk_params(epsilon, None);
    let mut v = validate_params(&top);
    if !v.is_ok() || v.base_case {
        return v;
    }
    let beta = top.beta;
    let mut e = 2.0 * epsilon;
    while e < beta && e < 0.5 {
        let level = validate_params(&ChunkParams::for_epsilon(e).with_beta(beta));
        v.violations.extend(
            level
                .violations
                .into_iter()
                .map(|s| format!("at ε = {e}: {s}")),
        );
        v.warnings.extend(
            level
                .warnings
                .into_iter()
                .map(|s| format!("at ε = {e}: {s}")),
        );
        e *= 2.0;
    }
    v
}

pub fn simulate_noiseless_with(
    spec: &ProtocolSpec,
    x: usize,
    y: usize,
    epsilon: f64,
    options: &SimulationOptions,
    rng: &mut RandomSource,
) -> Result<Simulation> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Parameter(format!("ε = {epsilon} outside (0, 1/2]")));
    }
    if !spec.is_deterministic() {
        return Err(Error::Unsupported(
            "compression needs a deterministic protocol".into(),
        ));
    }
    spec.validate()?;
    let validation = validate_run(epsilon, options).into_result()?;
    let padded = spec.padded();
    let total = padded.rounds();
    let root = padded.walker();
    let mut ledger = CostLedger::new();
    let mut chunks = Vec::new();

    let bits = if validation.base_case {
        let (bits, errors) = direct(&root, x, y, total, epsilon, rng, &mut ledger)?;
        chunks.push(ChunkSummary {
            start: 0,
            len: total,
            errors,
            branch: Branch::Direct,
            rounds: 1,
            bits: ledger.bits_sent,
        });
        bits
    } else {
        let mut compressor = Compressor::new(options.config());
        let full = options.chunk_params(epsilon, None).gamma;
        let mut walker = root;
        let mut bits = Vec::with_capacity(total);
        while bits.len() < total {
            let len = full.min(total - bits.len());
            let params = options.chunk_params(epsilon, Some(len));
            let ctx = ChunkContext::new(walker.clone(), x, y);
            let out = compressor.simulate_chunk(&ctx, &params, rng)?;
            chunks.push(ChunkSummary {
                start: bits.len(),
                len,
                errors: out.errors,
                branch: out.branch,
                rounds: out.rounds,
                bits: out.ledger.bits_sent,
            });
            ledger.merge(&out.ledger);
            for &b in &out.leaf {
                walker.push(b);
            }
            bits.extend_from_slice(&out.leaf);
        }
        bits
    };
    Ok(Simulation {
        transcript: Transcript::from_bits(padded.strip_padding(&bits)),
        padded: Transcript::from_bits(bits),
        ledger,
        chunks,
        validation,
    })
}
