use serde::{Deserialize, Serialize};

use crate::compressor::{
    threshold, validate_chunk, ChunkParams, CountDistribution, ProductCountDistribution,
    ThresholdResult,
};
use crate::error::{Error, Result};
use crate::protocol::CostLedger;

/// Largest chunk depth the class-space recursion accepts.
pub const MAX_EXACT_GAMMA: usize = 64;

/// Probability per error class `(m_x, m_y)` with both counts in
/// `[0, half]`, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassLaw {
    pub half: usize,
    pub probs: Vec<f64>,
}

impl ClassLaw {
    pub fn zeros(half: usize) -> Self {
        Self {
            half,
            probs: vec![0.0; (half + 1) * (half + 1)],
        }
    }

    /// Product of two `Binomial(half, crossover)` margins.
    pub fn binomial_product(half: usize, crossover: f64) -> Self {
        let d = CountDistribution::binomial(half, crossover);
        let mut law = Self::zeros(half);
        for a in 0..=half {
            for b in 0..=half {
                law.set(a, b, d.pmf()[a] * d.pmf()[b]);
            }
        }
        law
    }

    /// Empirical law from class counts.
    pub fn from_counts(half: usize, counts: &[u64]) -> Self {
        let n: u64 = counts.iter().sum();
        Self {
            half,
            probs: counts
                .iter()
                .map(|&c| if n > 0 { c as f64 / n as f64 } else { 0.0 })
                .collect(),
        }
    }

    pub fn index(&self, m_x: usize, m_y: usize) -> usize {
        m_x * (self.half + 1) + m_y
    }

    pub fn get(&self, m_x: usize, m_y: usize) -> f64 {
        self.probs[self.index(m_x, m_y)]
    }

    pub fn set(&mut self, m_x: usize, m_y: usize, value: f64) {
        let i = self.index(m_x, m_y);
        self.probs[i] = value;
    }

    pub fn classes(&self) -> impl Iterator<Item = (usize, usize)> {
        let h = self.half;
        (0..=h).flat_map(move |a| (0..=h).map(move |b| (a, b)))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            half: self.half,
            probs: self.probs.iter().map(|p| p * factor).collect(),
        }
    }

    /// Keeps the classes whose total count satisfies `keep` and
    /// renormalizes.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = Self::zeros(self.half);
        for (a, b) in self.classes() {
            if keep(a + b) {
                out.set(a, b, self.get(a, b));
            }
        }
        let total = out.total();
        if total > 0.0 {
            out.scaled(1.0 / total)
        } else {
            out
        }
    }

    pub fn max_abs_diff(&self, other: &ClassLaw) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Deterministic replay of the threshold protocol.
pub fn trace_threshold(
    dist: &ProductCountDistribution,
    budget: i64,
    m_x: i64,
    m_y: i64,
) -> Result<ThresholdResult> {
    threshold(budget, dist, m_x, m_y, &mut CostLedger::new())
}

/// Exact per-class behavior of one chunk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkLaw {
    /// Output law of the chunk sampler.
    pub law: ClassLaw,
    /// Output law of the low-error branch alone.
    pub low: ClassLaw,
    /// Output law of the high-error branch alone.
    pub high: ClassLaw,
    pub low_mass: f64,
    /// Brute-force probability that one low-branch round accepts.
    pub low_round_mass: f64,
    /// Brute-force probability that one high-branch round accepts.
    pub high_round_mass: f64,
}

/// Computes the sampler's output law class by class. The low branch's
/// nested candidate is replaced by the exact channel law at twice the
/// advantage, which is what the nested sampler produces.
pub fn exact_chunk_distribution(params: &ChunkParams) -> Result<ChunkLaw> {
    if params.gamma > MAX_EXACT_GAMMA {
        return Err(Error::Guard {
            entries: params.gamma as u64,
            limit: MAX_EXACT_GAMMA as u64,
        });
    }
    validate_chunk(params).into_result()?;
    let e = params.epsilon;
    let h = params.half();
    let budget = params.budget();
    let hf = h as f64;
    let p = params.low_mass();

    let low_candidate = ProductCountDistribution::binomial(h, 0.5 - 2.0 * e);
    let high_candidate = ProductCountDistribution::binomial(h, 0.5);

    let low_factor = |m: usize, w: i64| -> f64 {
        let d = m as f64 - w as f64;
        ((0.5 - e) / (0.5 - 2.0 * e)).powf(d) * ((0.5 + e) / (0.5 + 2.0 * e)).powf(-d)
    };
    let r = (0.5 - e) / (0.5 + e);
    let high_factor = |m: usize, w: i64| -> f64 {
        let m = m as f64;
        let ln_num = m * (0.5 - e).ln() + (hf - m) * (0.5 + e).ln();
        let ln_den = params.t.ln() + (w as f64 - budget as f64 / 2.0) * r.ln() - hf * 2f64.ln();
        (ln_num - ln_den).exp()
    };

    let mut low = ClassLaw::zeros(h);
    let mut high = ClassLaw::zeros(h);
    for a in 0..=h {
        for b in 0..=h {
            let (ai, bi) = (a as i64, b as i64);
            if p > 0.0 {
                let tr = trace_threshold(&low_candidate, budget, ai, bi)?;
                if !tr.answer {
                    let acc = low_factor(a, tr.theta_x) * low_factor(b, tr.theta_y);
                    if acc > 1.0 + 1e-9 {
                        return Err(Error::Invariant(format!(
                            "low acceptance {acc} at ({a}, {b})"
                        )));
                    }
                    low.set(a, b, low_candidate.prob(ai, bi) * acc);
                }
            }
            if p < 1.0 {
                let tr = trace_threshold(&high_candidate, budget, ai, bi)?;
                if tr.answer {
                    let fx = high_factor(a, tr.theta_x);
                    let fy = high_factor(b, tr.theta_y);
                    if fx > 1.0 + 1e-9 || fy > 1.0 + 1e-9 {
                        return Err(Error::Invariant(format!(
                            "high acceptance ({fx}, {fy}) at ({a}, {b})"
                        )));
                    }
                    high.set(a, b, high_candidate.prob(ai, bi) * fx * fy);
                }
            }
        }
    }
    let low_round_mass = low.total();
    let high_round_mass = high.total();
    let low = if low_round_mass > 0.0 {
        low.scaled(1.0 / low_round_mass)
    } else {
        low
    };
    let high = if high_round_mass > 0.0 {
        high.scaled(1.0 / high_round_mass)
    } else {
        high
    };
    let mut law = ClassLaw::zeros(h);
    for (i, slot) in law.probs.iter_mut().enumerate() {
        *slot = p * low.probs[i] + (1.0 - p) * high.probs[i];
    }
    Ok(ChunkLaw {
        law,
        low,
        high,
        low_mass: p,
        low_round_mass,
        high_round_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_round_chunk_law() {
        let params = ChunkParams::with_gamma(0.1, 2).with_t(10.0);
        let out = exact_chunk_distribution(&params).unwrap();
        let expect = [(0, 0, 0.36), (1, 0, 0.24), (0, 1, 0.24), (1, 1, 0.16)];
        for (a, b, v) in expect {
            assert!((out.law.get(a, b) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn full_budget_reweights_the_candidate() {
        let params = ChunkParams::with_gamma(0.1, 6).with_theta(6.0);
        let out = exact_chunk_distribution(&params).unwrap();
        assert_eq!(out.low_mass, 1.0);
        let target = ClassLaw::binomial_product(3, 0.4);
        assert!(out.law.max_abs_diff(&target) < 1e-12);
    }

    #[test]
    fn traces_of_trivial_cases() {
        let d = ProductCountDistribution::binomial(3, 0.5);
        let r = trace_threshold(&d, 6, 0, 0).unwrap();
        assert_eq!((r.answer, r.rounds), (false, 1));
        let point = ProductCountDistribution::new(
            CountDistribution::point(3, 1),
            CountDistribution::point(3, 2),
        );
        let r = trace_threshold(&point, 3, 1, 2).unwrap();
        assert_eq!(r.rounds, 1);
    }

    #[test]
    fn guard() {
        let params = ChunkParams::with_gamma(0.01, 66);
        assert!(matches!(
            exact_chunk_distribution(&params),
            Err(Error::Guard { .. })
        ));
    }
}
