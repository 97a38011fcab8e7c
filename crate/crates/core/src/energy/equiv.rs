use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::prior::{sample_with_prior, PriorCase};
use crate::error::{Error, Result};
use crate::infotheory::{node_at, visit_nodes, InputDist};
use crate::protocol::{
    bit_energy, CostLedger, NodeRule, Party, ProtocolSpec, RandomSource, Transcript,
};

/// Noiseless protocol simulating a variable-noise one: wherever the
/// original sends a bit over crossover `c`, the sender instead xors it
/// with a private Bernoulli(`c`) coin and sends the result noiselessly.
pub fn noiseless_from_noisy(pi: &ProtocolSpec) -> ProtocolSpec {
    pi.map_rules(&|r: NodeRule| NodeRule {
        p_one: r.received_one(),
        crossover: 0.0,
    })
}

/// Expected energy of `pi` under inputs drawn from `mu`, by enumeration.
pub fn distributional_energy_cost(pi: &ProtocolSpec, mu: &InputDist) -> Result<f64> {
    let mut total = 0.0;
    visit_nodes(pi, mu, |node| {
        for (w, r) in node.weights.iter().zip(node.rules) {
            total += w * bit_energy(r.crossover);
        }
    })?;
    Ok(total)
}

/// Probability, given only the transcript so far, that the next bit of
/// `phi` is 1 when the inputs are drawn from `mu`.
pub fn posterior_q(phi: &ProtocolSpec, mu: &InputDist, prefix: &[u8]) -> Result<f64> {
    let (weights, rules) = node_at(phi, mu, prefix)?;
    let mass: f64 = weights.iter().sum();
    if mass <= 0.0 {
        return Err(Error::Domain(format!(
            "prefix {prefix:?} has probability zero under mu"
        )));
    }
    let ones: f64 = weights
        .iter()
        .zip(&rules)
        .map(|(w, r)| w * r.received_one())
        .sum();
    Ok((ones / mass).clamp(0.0, 1.0))
}

/// One execution of [`NoisySimulator`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyRun {
    pub transcript: Transcript,
    pub ledger: CostLedger,
    pub cases: Vec<PriorCase>,
}

/// Runs a noiseless protocol bit by bit over variable-noise channels: each
/// bit is sent against the prior both parties compute from the transcript,
/// on a grid of resolution `n * 2^i` for the `i`-th bit (from 1).
#[derive(Clone, Debug)]
pub struct NoisySimulator<'a> {
    phi: &'a ProtocolSpec,
    mu: &'a InputDist,
    n: u64,
    priors: HashMap<Vec<u8>, f64>,
}

impl<'a> NoisySimulator<'a> {
    pub fn new(phi: &'a ProtocolSpec, mu: &'a InputDist, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter(
                "grid resolution n must be positive".into(),
            ));
        }
        if phi.rounds() >= 50 {
            return Err(Error::Unsupported(
                "grid resolution n * 2^T overflows".into(),
            ));
        }
        Ok(Self {
            phi,
            mu,
            n,
            priors: HashMap::new(),
        })
    }

    /// Upper bound on the summed grid spacings, `1 / (2n)`.
    pub fn slack(&self) -> f64 {
        1.0 / (2 * self.n) as f64
    }

    fn prior(&mut self, prefix: &[u8]) -> Result<f64> {
        if let Some(&q) = self.priors.get(prefix) {
            return Ok(q);
        }
        let q = posterior_q(self.phi, self.mu, prefix)?;
        self.priors.insert(prefix.to_vec(), q);
        Ok(q)
    }

    pub fn run(&mut self, x: usize, y: usize, rng: &mut RandomSource) -> Result<NoisyRun> {
        let mut walker = self.phi.walker();
        let mut ledger = CostLedger::new();
        let mut cases = Vec::with_capacity(self.phi.rounds());
        for i in 0..self.phi.rounds() {
            let speaker = walker.speaker().expect("round within protocol");
            let rule = walker.rule(match speaker {
                Party::Alice => x,
                Party::Bob => y,
            })?;
            if rule.crossover != 0.0 {
                return Err(Error::Unsupported(
                    "the simulated protocol must use a noiseless channel".into(),
                ));
            }
            let q = self.prior(walker.prefix())?;
            let n_i = self.n << (i + 1);
            let sent = sample_with_prior(rule.p_one, q, n_i, rng, &mut ledger)?;
            cases.push(sent.case);
            walker.push(sent.bit);
        }
        Ok(NoisyRun {
            transcript: Transcript::from_bits(walker.prefix().to_vec()),
            ledger,
            cases,
        })
    }
}
