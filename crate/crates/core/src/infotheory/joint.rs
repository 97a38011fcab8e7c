use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bernoulli::{binary_entropy, kl_bernoulli};
use crate::error::{Error, Result};
use crate::protocol::{NodeRule, Party, ProtocolSpec, Walker};

/// Largest table exact enumeration will build.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

/// Joint law `mu` of the inputs, stored row-major as `x * ny + y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDist {
    pub nx: usize,
    pub ny: usize,
    pub probs: Vec<f64>,
}

impl InputDist {
    pub fn uniform(nx: usize, ny: usize) -> Self {
        let n = nx * ny;
        Self {
            nx,
            ny,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn from_table(nx: usize, ny: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != nx * ny {
            return Err(Error::Shape {
                expected: nx * ny,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Parameter(
                "input weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Parameter("input weights sum to zero".into()));
        }
        Ok(Self {
            nx,
            ny,
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Random law with full support.
    pub fn random(nx: usize, ny: usize, rng: &mut impl Rng) -> Self {
        let weights = (0..nx * ny).map(|_| rng.random::<f64>() + 0.05).collect();
        Self::from_table(nx, ny, weights).expect("positive weights")
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny + y]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nx).flat_map(move |x| (0..self.ny).map(move |y| (x, y)))
    }

    fn check(&self, spec: &ProtocolSpec) -> Result<()> {
        if self.nx != spec.alice_inputs() || self.ny != spec.bob_inputs() {
            return Err(Error::Shape {
                expected: spec.alice_inputs() * spec.bob_inputs(),
                got: self.nx * self.ny,
            });
        }
        Ok(())
    }
}

fn guard(spec: &ProtocolSpec, mu: &InputDist) -> Result<()> {
    let leaves = 1u64.checked_shl(spec.rounds() as u32).unwrap_or(u64::MAX);
    let entries = (mu.nx * mu.ny) as u64 * leaves;
    if spec.rounds() >= 64 || entries > ENUMERATION_LIMIT {
        return Err(Error::Guard {
            entries,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Rule of the speaker at `walker` for every input pair, in `mu`'s order.
fn rules_at(walker: &Walker<'_>, mu: &InputDist) -> Result<Vec<NodeRule>> {
    let speaker = walker
        .speaker()
        .ok_or_else(|| Error::Spec("no speaker at a leaf".into()))?;
    let per_input = |n: usize| (0..n).map(|i| walker.rule(i)).collect::<Result<Vec<_>>>();
    Ok(match speaker {
        Party::Alice => {
            let rules = per_input(mu.nx)?;
            mu.pairs().map(|(x, _)| rules[x]).collect()
        }
        Party::Bob => {
            let rules = per_input(mu.ny)?;
            mu.pairs().map(|(_, y)| rules[y]).collect()
        }
    })
}

/// One internal node seen during [`visit_nodes`].
pub struct NodeView<'a> {
    pub prefix: &'a [u8],
    /// `mu(x, y) * Pr[prefix | x, y]` per input pair.
    pub weights: &'a [f64],
    pub rules: &'a [NodeRule],
}

/// Visits every internal node reachable with positive probability.
pub fn visit_nodes(
    spec: &ProtocolSpec,
    mu: &InputDist,
    mut f: impl FnMut(&NodeView<'_>),
) -> Result<()> {
    mu.check(spec)?;
    guard(spec, mu)?;
    fn rec(
        walker: Walker<'_>,
        weights: Vec<f64>,
        mu: &InputDist,
        f: &mut impl FnMut(&NodeView<'_>),
    ) -> Result<()> {
        if walker.is_complete() || weights.iter().all(|&w| w == 0.0) {
            return Ok(());
        }
        let rules = rules_at(&walker, mu)?;
        f(&NodeView {
            prefix: walker.prefix(),
            weights: &weights,
            rules: &rules,
        });
        for bit in [0u8, 1] {
            let next: Vec<f64> = weights
                .iter()
                .zip(&rules)
                .map(|(w, r)| {
                    let one = r.received_one();
                    w * if bit == 1 { one } else { 1.0 - one }
                })
                .collect();
            let mut child = walker.clone();
            child.push(bit);
            rec(child, next, mu, f)?;
        }
        Ok(())
    }
    rec(spec.walker(), mu.probs.clone(), mu, &mut f)
}

/// Weights and rules at the node reached by `prefix`.
pub fn node_at(
    spec: &ProtocolSpec,
    mu: &InputDist,
    prefix: &[u8],
) -> Result<(Vec<f64>, Vec<NodeRule>)> {
    mu.check(spec)?;
    let mut walker = spec.walker();
    let mut weights = mu.probs.clone();
    for &bit in prefix {
        let rules = rules_at(&walker, mu)?;
        for (w, r) in weights.iter_mut().zip(&rules) {
            let one = r.received_one();
            *w *= if bit == 1 { one } else { 1.0 - one };
        }
        walker.push(bit);
    }
    let rules = rules_at(&walker, mu)?;
    Ok((weights, rules))
}

/// Exact law of `(x, y, transcript)`, indexed `[(x * ny + y) * 2^T + leaf]`
/// with the leaf's bits read most significant first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteJoint {
    pub nx: usize,
    pub ny: usize,
    pub rounds: usize,
    pub probs: Vec<f64>,
}

impl FiniteJoint {
    pub fn from_protocol(spec: &ProtocolSpec, mu: &InputDist) -> Result<Self> {
        mu.check(spec)?;
        guard(spec, mu)?;
        let leaves = 1usize << spec.rounds();
        let mut probs = vec![0.0; mu.nx * mu.ny * leaves];
        fn rec(
            walker: Walker<'_>,
            input: (usize, usize),
            mass: f64,
            index: usize,
            out: &mut [f64],
        ) -> Result<()> {
            if walker.is_complete() {
                out[index] += mass;
                return Ok(());
            }
            if mass == 0.0 {
                return Ok(());
            }
            let own = match walker.speaker() {
                Some(Party::Alice) => input.0,
                _ => input.1,
            };
            let one = walker.rule(own)?.received_one();
            for (bit, m) in [(0u8, 1.0 - one), (1, one)] {
                let mut child = walker.clone();
                child.push(bit);
                rec(child, input, mass * m, (index << 1) | bit as usize, out)?;
            }
            Ok(())
        }
        for (x, y) in mu.pairs() {
            let base = (x * mu.ny + y) * leaves;
            let mut slot = vec![0.0; leaves];
            rec(spec.walker(), (x, y), mu.prob(x, y), 0, &mut slot)?;
            probs[base..base + leaves].copy_from_slice(&slot);
        }
        Ok(Self {
            nx: mu.nx,
            ny: mu.ny,
            rounds: spec.rounds(),
            probs,
        })
    }

    pub fn leaves(&self) -> usize {
        1 << self.rounds
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Law of the transcript alone.
    pub fn transcript_law(&self) -> Vec<f64> {
        let mut law = vec![0.0; self.leaves()];
        for row in self.probs.chunks(self.leaves()) {
            for (l, p) in law.iter_mut().zip(row) {
                *l += p;
            }
        }
        law
    }

    /// Law of the transcript given inputs `(x, y)`.
    pub fn conditional_law(&self, x: usize, y: usize) -> Vec<f64> {
        let n = self.leaves();
        let row = &self.probs[(x * self.ny + y) * n..][..n];
        let mass: f64 = row.iter().sum();
        row.iter()
            .map(|p| if mass > 0.0 { p / mass } else { 0.0 })
            .collect()
    }

    /// `I(XY; transcript)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let law = self.transcript_law();
        let n = self.leaves();
        let mut info = 0.0;
        for row in self.probs.chunks(n) {
            let mass: f64 = row.iter().sum();
            for (p, l) in row.iter().zip(&law) {
                if *p > 0.0 {
                    info += p * (p / (mass * l)).log2();
                }
            }
        }
        info
    }
}

/// External information cost computed three independent ways.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoCost {
    /// `I(XY; transcript)` from the enumerated joint law.
    pub direct: f64,
    /// Sum over rounds of `I(XY; bit_i | earlier bits)`.
    pub chain: f64,
    /// Sum over rounds of the expected divergence of the next-bit law given
    /// the inputs from the next-bit law given only the transcript.
    pub divergence: f64,
    pub per_round: Vec<f64>,
}

impl InfoCost {
    pub fn value(&self) -> f64 {
        self.direct
    }

    /// Largest pairwise disagreement between the three routes.
    pub fn spread(&self) -> f64 {
        let v = [self.direct, self.chain, self.divergence];
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

pub fn external_info_cost(spec: &ProtocolSpec, mu: &InputDist) -> Result<InfoCost> {
    let direct = FiniteJoint::from_protocol(spec, mu)?.mutual_information();
    let mut per_round = vec![0.0; spec.rounds()];
    let mut divergence = 0.0;
    visit_nodes(spec, mu, |node| {
        let mass: f64 = node.weights.iter().sum();
        let q = node
            .weights
            .iter()
            .zip(node.rules)
            .map(|(w, r)| w * r.received_one())
            .sum::<f64>()
            / mass;
        let mut conditional = 0.0;
        for (w, r) in node.weights.iter().zip(node.rules) {
            if *w > 0.0 {
                conditional += w * binary_entropy(r.received_one());
                divergence += w * kl_bernoulli(r.received_one(), q);
            }
        }
        per_round[node.prefix.len()] += mass * binary_entropy(q) - conditional;
    })?;
    Ok(InfoCost {
        direct,
        chain: per_round.iter().sum(),
        divergence,
        per_round,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::protocol::TableBuilder;

    fn sends_x(flip: f64) -> ProtocolSpec {
        let mut b = TableBuilder::new(1, 2, 1);
        for x in 0..2 {
            let p = if x == 1 { 1.0 - flip } else { flip };
            b.set(
                Party::Alice,
                x,
                &[],
                NodeRule {
                    p_one: p,
                    crossover: 0.0,
                },
            );
        }
        b.build()
    }

    #[test]
    fn sending_the_input() {
        let mu = InputDist::uniform(2, 1);
        let ic = external_info_cost(&sends_x(0.0), &mu).unwrap();
        assert!((ic.direct - 1.0).abs() < 1e-12 && ic.spread() < 1e-12);
        let ic = external_info_cost(&sends_x(0.25), &mu).unwrap();
        assert!((ic.direct - 0.188722).abs() < 1e-6 && ic.spread() < 1e-12);
        let ic = external_info_cost(&sends_x(0.5), &mu).unwrap();
        assert!(ic.direct.abs() < 1e-12);
    }

    #[test]
    fn guard_blocks_large_trees() {
        let spec = ProtocolSpec::seeded(21, 1, 1, 0);
        assert!(matches!(
            FiniteJoint::from_protocol(&spec, &InputDist::uniform(1, 1)),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn joint_is_normalized() {
        let spec = ProtocolSpec::seeded(6, 3, 2, 4)
            .with_flip(0.2)
            .with_crossover(0.1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mu = InputDist::random(3, 2, &mut rng);
        let joint = FiniteJoint::from_protocol(&spec, &mu).unwrap();
        assert!((joint.total() - 1.0).abs() < 1e-12);
        let ic = external_info_cost(&spec, &mu).unwrap();
        assert!(ic.spread() < 1e-9);
    }
}
