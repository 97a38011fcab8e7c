use serde::{Deserialize, Serialize};

use super::counts::{ln_binomial_pmf, log_sum_exp, xlny};
use crate::error::{Error, Result};

/// Noise advantage at or above which chunks are simulated directly.
pub const DEFAULT_BETA: f64 = 0.125;

/// Bound on rejection rounds for a single chunk before aborting.
pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000_000;

/// Per-round ratio below which the low branch loses its cost guarantee.
pub const MIN_LOW_RATIO: f64 = 5.0;

/// Parameters of one compressed chunk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkParams {
    pub gamma: usize,
    pub epsilon: f64,
    pub theta: f64,
    pub t: f64,
    pub beta: f64,
}

impl ChunkParams {
    /// Chunk depth `ceil(1/eps^2)` rounded up to even.
    pub fn default_gamma(epsilon: f64) -> usize {
        let g = (1.0 / (epsilon * epsilon)).ceil() as usize;
        (g + g % 2).max(2)
    }

    pub fn default_theta(gamma: usize, epsilon: f64) -> f64 {
        gamma as f64 * (0.5 - 3.0 * epsilon)
    }

    /// `min(e^6, (1 + 2 eps)^(3/eps))`.
    pub fn default_t(epsilon: f64) -> f64 {
        let bound = (3.0 / epsilon) * (2.0 * epsilon).ln_1p();
        bound.min(6.0).exp()
    }

    /// Every knob at its default for this noise level.
    pub fn for_epsilon(epsilon: f64) -> Self {
        Self::with_gamma(epsilon, Self::default_gamma(epsilon))
    }

    /// Defaults for a chunk of depth `gamma`.
    pub fn with_gamma(epsilon: f64, gamma: usize) -> Self {
        Self {
            gamma,
            epsilon,
            theta: Self::default_theta(gamma, epsilon),
            t: Self::default_t(epsilon),
            beta: DEFAULT_BETA,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Smallest admissible `t` for these parameters.
    pub fn with_minimal_t(mut self) -> Self {
        self.t = self.high_sup();
        self
    }

    /// Integer error budget `floor(theta)`. The default `theta` is computed
    /// in floating point and can land just below an integer it equals
    /// exactly, so the floor tolerates a tiny shortfall.
    pub fn budget(&self) -> i64 {
        (self.theta + 1e-9).floor() as i64
    }

    /// Rounds per party.
    pub fn half(&self) -> usize {
        self.gamma / 2
    }

    pub fn crossover(&self) -> f64 {
        0.5 - self.epsilon
    }

    pub fn is_base_case(&self) -> bool {
        self.epsilon >= self.beta
    }

    pub fn low_mass(&self) -> f64 {
        low_error_mass(self)
    }

    /// Likelihood ratio of a leaf with exactly `floor(theta)` errors under
    /// noise `2 eps` versus noise `eps`.
    pub fn low_ratio(&self) -> f64 {
        self.ln_low_ratio().exp()
    }

    pub fn ln_low_ratio(&self) -> f64 {
        let e = self.epsilon;
        let k = self.budget().clamp(0, self.gamma as i64) as f64;
        let rest = self.gamma as f64 - k;
        xlny(k, 0.5 - 2.0 * e) + xlny(rest, 0.5 + 2.0 * e) - xlny(k, 0.5 - e) - xlny(rest, 0.5 + e)
    }

    /// Supremum over reachable states of the high-branch acceptance
    /// numerator; `t` must dominate it.
    pub fn high_sup(&self) -> f64 {
        let e = self.epsilon;
        let h = self.half() as f64;
        let k = self.budget() as f64 / 2.0;
        ((h - k) * (2.0 * e).ln_1p() + k * (-2.0 * e).ln_1p()).exp()
    }

    /// Probability that one low-branch round accepts some leaf.
    pub fn low_accept_mass(&self) -> f64 {
        self.low_mass() * self.low_ratio()
    }

    /// Probability that one high-branch round accepts some leaf.
    pub fn high_accept_mass(&self) -> f64 {
        (1.0 - self.low_mass()) / (self.t * self.t)
    }

    pub fn validate(&self) -> Result<Validation> {
        validate_params(self).into_result()
    }
}

/// `Pr[Binomial(gamma, 1/2 - eps) <= floor(theta)]`.
pub fn low_error_mass(params: &ChunkParams) -> f64 {
    let budget = params.budget();
    if budget < 0 {
        return 0.0;
    }
    let n = params.gamma as u64;
    if budget as u64 >= n {
        return 1.0;
    }
    let c = params.crossover();
    log_sum_exp((0..=budget as u64).map(|i| ln_binomial_pmf(n, i, c)))
        .exp()
        .min(1.0)
}

/// Outcome of [`validate_params`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub base_case: bool,
    pub low_ratio: Option<f64>,
    pub high_sup: Option<f64>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_ok() {
            Ok(self)
        } else {
            Err(Error::Parameter(self.violations.join("; ")))
        }
    }
}

/// Checks the preconditions of the chunk sampler. When `epsilon >= beta`
/// the chunk machinery is never entered, so only the ranges are checked.
pub fn validate_params(params: &ChunkParams) -> Validation {
    let mut v = Validation {
        base_case: params.is_base_case(),
        ..Validation::default()
    };
    check_common(params, &mut v);
    if !v.base_case {
        check_chunk(params, &mut v);
    }
    v
}

/// Checks every chunk precondition regardless of the base-case flag.
pub fn validate_chunk(params: &ChunkParams) -> Validation {
    let mut v = Validation {
        base_case: params.is_base_case(),
        ..Validation::default()
    };
    check_common(params, &mut v);
    check_chunk(params, &mut v);
    v
}

fn check_common(params: &ChunkParams, v: &mut Validation) {
    if params.gamma == 0 || !params.gamma.is_multiple_of(2) {
        v.violations.push("γ must be even".into());
    }
    if !(params.epsilon > 0.0 && params.epsilon <= 0.5) {
        v.violations
            .push(format!("ε = {} outside (0, 1/2]", params.epsilon));
    }
    if !(params.beta > 0.0 && params.beta <= 0.5) {
        v.violations
            .push(format!("β = {} outside (0, 1/2]", params.beta));
    }
}

fn check_chunk(params: &ChunkParams, v: &mut Validation) {
    let e = params.epsilon;
    if !(0.0..=params.gamma as f64).contains(&params.theta) {
        v.violations
            .push(format!("θ = {} outside [0, γ]", params.theta));
    }
    if !(e > 0.0 && e < 0.25) {
        v.violations.push(format!(
            "ε = {e} gives low-branch acceptance ratios above 1 (needs ε < 1/4)"
        ));
        return;
    }
    // Each nested level doubles the advantage until it reaches the base case.
    let mut level = 2.0 * e;
    while level < params.beta {
        level *= 2.0;
    }
    if level > 0.5 {
        v.violations.push(format!(
            "nested advantage {level} exceeds 1/2 before reaching the base case"
        ));
    }
    let sup = params.high_sup();
    v.high_sup = Some(sup);
    if !(params.t.is_finite() && params.t >= sup * (1.0 - 1e-12)) {
        v.violations.push(format!(
            "t = {} below the high-branch acceptance supremum {sup}",
            params.t
        ));
    }
    let budget = params.budget();
    if budget >= 0 && (budget as usize) < params.gamma {
        let ratio = params.low_ratio();
        v.low_ratio = Some(ratio);
        if ratio < MIN_LOW_RATIO {
            v.warnings.push(format!(
                "low-branch ratio R = {ratio:.4} < {MIN_LOW_RATIO}: expected cost bound not guaranteed"
            ));
        }
    }
}
