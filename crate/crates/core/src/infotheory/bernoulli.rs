use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `x log2(x / y)` with `0 log 0 = 0`.
fn term(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).log2()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    h(p) + h(1.0 - p)
}

/// `D(Bernoulli(p) || Bernoulli(q))` in bits; infinite when `p` is not
/// absolutely continuous with respect to `q`.
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    (term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0)
}

/// Fact-style bounds on `ln 2 * D(p || q)`, in nats:
/// `sum d^2 / (2 max(p_x, q_x)) <= ln 2 * D <= sum d^2 / q_x` over both
/// outcomes.
pub fn ine_bounds(p: f64, q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) || !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "ine bounds need q in (0, 1), got p = {p}, q = {q}"
        )));
    }
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (a, b) in [(p, q), (1.0 - p, 1.0 - q)] {
        let d2 = (a - b) * (a - b);
        lower += d2 / (2.0 * a.max(b));
        upper += d2 / b;
    }
    Ok((lower, upper))
}

/// Divergence regions, in the order the prior sampler dispatches them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table1Region {
    /// `p <= 2q`
    Near,
    /// `2q < p < 0.02`, `q < 0.01`
    SmallFar,
    /// `2q < p`, `q >= 0.01`
    FarModerate,
    /// `p >= 0.02`, `q < 0.01`
    FarSmallPrior,
}

impl Table1Region {
    pub fn label(&self) -> &'static str {
        match self {
            Table1Region::Near => "p ≤ 2q",
            Table1Region::SmallFar => "2q < p < 0.02, q < 0.01",
            Table1Region::FarModerate => "2q < p, q ≥ 0.01",
            Table1Region::FarSmallPrior => "p ≥ 0.02, q < 0.01",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Bound {
    pub region: Table1Region,
    /// Lower bound on `D(p || q)` in bits.
    pub bound: f64,
}

/// Coefficient of `log2(1/q)` in the small-prior region.
pub fn small_prior_constant() -> f64 {
    let e = std::f64::consts::E;
    0.02 * (1.0 - (50.0 * e).log2() / 200f64.log2())
}

/// Region of `(p, q)` and an explicit lower bound on `D(p || q)` there.
/// Inputs with `q > 1/2` are relabeled to `(1 - p, 1 - q)` first.
pub fn table1_bound(p: f64, q: f64) -> Result<Table1Bound> {
    if !(0.0..=1.0).contains(&p) || !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "divergence bound needs q in (0, 1), got p = {p}, q = {q}"
        )));
    }
    let (p, q) = if q > 0.5 { (1.0 - p, 1.0 - q) } else { (p, q) };
    let ine_lower = || ine_bounds(p, q).map(|(lo, _)| lo / LN_2);
    let d2 = (p - q) * (p - q);
    let out = if p <= 2.0 * q {
        Table1Bound {
            region: Table1Region::Near,
            bound: d2 / (4.0 * q * LN_2),
        }
    } else if p < 0.02 && q < 0.01 {
        let ratio = (1.0 - 1.0 / 3f64.ln()) * p * (p / q).log2();
        Table1Bound {
            region: Table1Region::SmallFar,
            bound: ratio.min(d2 / (2.0 * p * LN_2)),
        }
    } else if q >= 0.01 {
        Table1Bound {
            region: Table1Region::FarModerate,
            bound: d2 / (2.0 * LN_2),
        }
    } else {
        let bound = if q <= 0.005 {
            small_prior_constant() * (1.0 / q).log2()
        } else {
            ine_lower()?
        };
        Table1Bound {
            region: Table1Region::FarSmallPrior,
            bound,
        }
    };
    Ok(out)
}
