use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// `k * ln(p)` with the convention `0 * ln 0 = 0`.
#[inline]
pub(crate) fn xlny(k: f64, p: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * p.ln()
    }
}

/// Natural log of the binomial pmf `C(n,k) c^k (1-c)^(n-k)`.
pub fn ln_binomial_pmf(n: u64, k: u64, c: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_binomial(n, k) + xlny(k as f64, c) + xlny((n - k) as f64, 1.0 - c)
}

/// Stable `ln(sum(exp(v)))`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Law of one party's error count on the integer support `[0, n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pmf: Vec<f64>,
    /// `cdf[k] = Pr[count <= k]`.
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl CountDistribution {
    /// Normalizes nonnegative weights over `[0, weights.len() - 1]`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Parameter(
                "count weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Invariant(
                "count distribution has empty support".into(),
            ));
        }
        let pmf: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        Ok(Self::from_pmf(pmf))
    }

    fn from_pmf(pmf: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cdf = pmf
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { pmf, cdf }
    }

    /// `Binomial(n, c)`, evaluated in log-space.
    pub fn binomial(n: usize, c: f64) -> Self {
        let pmf = (0..=n as u64)
            .map(|k| ln_binomial_pmf(n as u64, k, c).exp())
            .collect();
        Self::from_pmf(pmf)
    }

    pub fn point(n: usize, k: usize) -> Self {
        let mut pmf = vec![0.0; n + 1];
        pmf[k] = 1.0;
        Self::from_pmf(pmf)
    }

    /// Largest value in the support range.
    pub fn n(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, k: i64) -> f64 {
        usize::try_from(k)
            .ok()
            .and_then(|k| self.pmf.get(k))
            .copied()
            .unwrap_or(0.0)
    }

    /// `Pr[count <= k]` for any integer `k`.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if k as usize >= self.cdf.len() {
            1.0
        } else {
            self.cdf[k as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().sum()
    }

    fn restrict(&self, keep: impl Fn(i64) -> bool) -> Result<Self> {
        let weights: Vec<f64> = self
            .pmf
            .iter()
            .enumerate()
            .map(|(k, &w)| if keep(k as i64) { w } else { 0.0 })
            .collect();
        Self::from_weights(weights)
    }

    /// Conditions on `count > k`.
    pub fn condition_greater(&self, k: i64) -> Result<Self> {
        self.restrict(|i| i > k)
    }

    /// Conditions on `count < k`.
    pub fn condition_less(&self, k: i64) -> Result<Self> {
        self.restrict(|i| i < k)
    }

    /// Conditions on `count != k`.
    pub fn condition_not(&self, k: i64) -> Result<Self> {
        self.restrict(|i| i != k)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, w)| k as f64 * w).sum()
    }
}

/// Independent error-count laws for Alice's and Bob's rounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCountDistribution {
    pub dx: CountDistribution,
    pub dy: CountDistribution,
}

impl ProductCountDistribution {
    pub fn new(dx: CountDistribution, dy: CountDistribution) -> Self {
        Self { dx, dy }
    }

    /// Both margins `Binomial(n, c)`.
    pub fn binomial(n: usize, c: f64) -> Self {
        let d = CountDistribution::binomial(n, c);
        Self {
            dx: d.clone(),
            dy: d,
        }
    }

    pub fn prob(&self, m_x: i64, m_y: i64) -> f64 {
        self.dx.prob(m_x) * self.dy.prob(m_y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_matches_direct_terms() {
        let d = CountDistribution::binomial(4, 0.5);
        let expect = [1.0, 4.0, 6.0, 4.0, 1.0].map(|w| w / 16.0);
        for (a, b) in d.pmf().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((d.cdf(1) - 5.0 / 16.0).abs() < 1e-15);
        assert_eq!(d.cdf(-1), 0.0);
        assert_eq!(d.cdf(9), 1.0);
    }

    #[test]
    fn conditioning_renormalizes() {
        let d = CountDistribution::binomial(4, 0.5);
        let g = d.condition_greater(1).unwrap();
        assert!((g.prob(2) - 6.0 / 11.0).abs() < 1e-15);
        assert_eq!(g.prob(1), 0.0);
        assert!((g.total() - 1.0).abs() < 1e-12);
        let l = d.condition_less(1).unwrap();
        assert_eq!(l.prob(0), 1.0);
        assert!(CountDistribution::point(3, 0).condition_greater(0).is_err());
        let n = d.condition_not(2).unwrap();
        assert!((n.prob(0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn degenerate_channels() {
        let d = CountDistribution::binomial(3, 0.0);
        assert_eq!(d.prob(0), 1.0);
        let d = CountDistribution::binomial(3, 1.0);
        assert_eq!(d.prob(3), 1.0);
    }

    #[test]
    fn large_support_does_not_underflow() {
        let d = CountDistribution::binomial(2000, 0.45);
        assert!((d.total() - 1.0).abs() < 1e-10);
        assert!((d.mean() - 900.0).abs() < 1e-6);
    }
}
