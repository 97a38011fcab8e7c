use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Default significance level of a single goodness-of-fit test.
pub const SIGNIFICANCE: f64 = 0.001;

/// Smallest expected count a pooled cell may have.
pub const MIN_EXPECTED: f64 = 5.0;

/// Per-test level when `tests` tests share one significance budget.
pub fn bonferroni(tests: usize) -> f64 {
    SIGNIFICANCE / tests.max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: u64,
    /// Cells after pooling.
    pub cells: usize,
}

/// Pearson chi-square test of `observed` counts against the probabilities
/// `expected`. Adjacent cells are pooled, in order, until each pooled cell
/// expects at least [`MIN_EXPECTED`] samples.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], threshold: f64) -> GofResult {
    assert_eq!(
        observed.len(),
        expected.len(),
        "observed and expected cells differ"
    );
    let n: u64 = observed.iter().sum();
    let total_p: f64 = expected.iter().sum();
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    let mut impossible = false;
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 && o > 0 {
            impossible = true;
        }
        acc.0 += o as f64;
        acc.1 += n as f64 * p / total_p;
        if acc.1 >= MIN_EXPECTED {
            groups.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => groups.push(acc),
        }
    }
    let cells = groups.len();
    if impossible {
        return GofResult {
            statistic: f64::INFINITY,
            dof: cells.saturating_sub(1),
            p_value: 0.0,
            threshold,
            pass: false,
            samples: n,
            cells,
        };
    }
    if cells <= 1 {
        return GofResult {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            threshold,
            pass: true,
            samples: n,
            cells,
        };
    }
    let statistic: f64 = groups.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(0.0);
    GofResult {
        statistic,
        dof,
        p_value,
        threshold,
        pass: p_value >= threshold,
        samples: n,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn exact_counts_pass() {
        let law = [0.1, 0.2, 0.3, 0.4];
        let counts: Vec<u64> = law
            .iter()
            .map(|p| (p * 10_000.0f64).round() as u64)
            .collect();
        let r = chi_square_gof(&counts, &law, SIGNIFICANCE);
        assert!(r.pass && r.p_value > 0.99 && r.dof == 3);
    }

    #[test]
    fn single_cell_passes_trivially() {
        let r = chi_square_gof(&[7], &[1.0], SIGNIFICANCE);
        assert_eq!((r.pass, r.p_value), (true, 1.0));
    }

    #[test]
    fn sparse_cells_are_pooled() {
        let law = [0.001, 0.001, 0.498, 0.5];
        let r = chi_square_gof(&[0, 1, 50, 49], &law, SIGNIFICANCE);
        assert_eq!(r.cells, 2);
    }

    #[test]
    fn shifted_law_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 100_000;
        // Two Bernoulli(0.45) counts against the Bernoulli(0.4) law.
        let mut counts = [0u64; 3];
        for _ in 0..n {
            let k = (rng.random::<f64>() < 0.45) as usize + (rng.random::<f64>() < 0.45) as usize;
            counts[k] += 1;
        }
        let law = [0.36, 0.48, 0.16];
        assert!(!chi_square_gof(&counts, &law, SIGNIFICANCE).pass);
        assert!(chi_square_gof(&counts, &[0.3025, 0.495, 0.2025], SIGNIFICANCE).pass);
    }

    #[test]
    fn impossible_cell_fails() {
        assert!(!chi_square_gof(&[10, 1], &[1.0, 0.0], SIGNIFICANCE).pass);
    }
}
