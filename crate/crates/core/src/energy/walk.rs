use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::CostLedger;

/// Largest gap the biased walk covers by sending noiseless bits directly.
pub const DIRECT_GAP: u64 = 12;

/// Abort thresholds for the walks. Expected running times are finite, so
/// these only trap bugs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkLimits {
    /// Maximum nesting of the biased walk's recursive calls.
    pub max_depth: u32,
    /// The unbiased walk aborts after `span_factor * span^2` steps.
    pub span_factor: u64,
    /// Total steps allowed in one biased walk, recursion included.
    pub max_steps: u64,
}

impl Default for WalkLimits {
    fn default() -> Self {
        Self {
            max_depth: 100,
            span_factor: 100,
            max_steps: 1 << 40,
        }
    }
}

/// Where a walk stopped and what it cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WalkOutcome {
    pub end: u64,
    pub steps: u64,
    pub ledger: CostLedger,
}

/// Points `k / (2 n)` of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n: u64,
}

impl Grid {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("grid resolution must be positive".into()));
        }
        Ok(Self { n })
    }

    /// Spacing `1 / (2 n)`.
    pub fn spacing(&self) -> f64 {
        1.0 / (2 * self.n) as f64
    }

    /// Index of the smallest grid point at or above `q`, at least 1.
    pub fn round_up(&self, q: f64) -> u64 {
        let scaled = 2.0 * self.n as f64 * q;
        ((scaled - 1e-9).ceil().max(1.0) as u64).min(2 * self.n)
    }

    pub fn value(&self, index: u64) -> f64 {
        index as f64 / (2 * self.n) as f64
    }
}

/// Moves from `a` to `a + b` (requires `a >= b`) by a walk whose steps are
/// bits sent over a slightly noisy channel. Every run ends at `a + b`.
pub fn brw_to_top(
    a: u64,
    b: u64,
    rng: &mut impl Rng,
    ledger: &mut CostLedger,
) -> Result<WalkOutcome> {
    brw_with_limits(a, b, &WalkLimits::default(), rng, ledger)
}

pub fn brw_with_limits(
    a: u64,
    b: u64,
    limits: &WalkLimits,
    rng: &mut impl Rng,
    ledger: &mut CostLedger,
) -> Result<WalkOutcome> {
    if a < b {
        return Err(Error::Parameter(format!(
            "biased walk needs a >= b, got a = {a}, b = {b}"
        )));
    }
    let start = *ledger;
    let mut steps = 0;
    brw_rec(a, b, 0, limits, rng, ledger, &mut steps)?;
    Ok(WalkOutcome {
        end: a + b,
        steps,
        ledger: ledger.since(&start),
    })
}

fn brw_rec(
    a: u64,
    b: u64,
    depth: u32,
    limits: &WalkLimits,
    rng: &mut impl Rng,
    ledger: &mut CostLedger,
    steps: &mut u64,
) -> Result<()> {
    if depth > limits.max_depth {
        return Err(Error::IterationCap {
            context: "biased walk recursion depth".into(),
            cap: u64::from(limits.max_depth),
        });
    }
    if b == 0 {
        return Ok(());
    }
    if b <= DIRECT_GAP {
        ledger.charge_noiseless(b);
        *steps += b;
        return Ok(());
    }
    let c = a / 2;
    let crossover = 0.5 - 3.0 / c as f64;
    let (low, top) = (a - c, a + b);
    loop {
        let mut d = a;
        let mut walked = 0;
        while d > low && d < top && walked < c * c {
            // The sender always transmits 1; the walk moves right on a
            // received 1.
            let flipped = rng.random::<f64>() < crossover;
            ledger.charge(crossover);
            d = if flipped { d - 1 } else { d + 1 };
            walked += 1;
        }
        *steps += walked;
        if *steps > limits.max_steps {
            return Err(Error::IterationCap {
                context: "biased walk steps".into(),
                cap: limits.max_steps,
            });
        }
        if d < a {
            brw_rec(d, a - d, depth + 1, limits, rng, ledger, steps)?;
        } else if d > a {
            return brw_rec(d, top - d, depth + 1, limits, rng, ledger, steps);
        }
    }
}

/// Symmetric walk from `a` until it is absorbed at 0 or `top`, with steps
/// sent over a crossover-1/2 channel (no energy). Reaches `top` with
/// probability `a / top`.
pub fn unbiased_walk(
    a: u64,
    top: u64,
    rng: &mut impl RngCore,
    ledger: &mut CostLedger,
) -> Result<WalkOutcome> {
    unbiased_with_limits(a, top, &WalkLimits::default(), rng, ledger)
}

pub fn unbiased_with_limits(
    a: u64,
    top: u64,
    limits: &WalkLimits,
    rng: &mut impl RngCore,
    ledger: &mut CostLedger,
) -> Result<WalkOutcome> {
    if a > top {
        return Err(Error::Parameter(format!(
            "walk start {a} above its top {top}"
        )));
    }
    let cap = limits
        .span_factor
        .saturating_mul(top.saturating_mul(top))
        .max(limits.span_factor);
    let mut pos = a as i64;
    let top_i = top as i64;
    let mut steps = 0u64;
    while pos > 0 && pos < top_i {
        if steps > cap {
            return Err(Error::IterationCap {
                context: "unbiased walk".into(),
                cap,
            });
        }
        if pos >= 64 && pos + 64 <= top_i {
            // Far from both ends: 64 steps at once from one word of coins.
            let word = rng.next_u64();
            pos += 2 * i64::from(word.count_ones()) - 64;
            steps += 64;
        } else {
            pos += if rng.next_u32() & 1 == 1 { 1 } else { -1 };
            steps += 1;
        }
    }
    ledger.charge_many(steps, 0.5);
    Ok(WalkOutcome {
        end: pos as u64,
        steps,
        ledger: CostLedger {
            bits_sent: steps,
            energy: 0.0,
        },
    })
}

/// Climbs from `from` to `to` by repeated doubling with [`brw_to_top`].
pub fn climb(
    from: u64,
    to: u64,
    rng: &mut impl Rng,
    ledger: &mut CostLedger,
) -> Result<WalkOutcome> {
    if from == 0 || from > to {
        return Err(Error::Parameter(format!(
            "cannot climb from {from} to {to}"
        )));
    }
    let start = *ledger;
    let mut a = from;
    let mut steps = 0;
    while a < to {
        let b = a.min(to - a);
        steps += brw_to_top(a, b, rng, ledger)?.steps;
        a += b;
    }
    Ok(WalkOutcome {
        end: a,
        steps,
        ledger: ledger.since(&start),
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn short_gaps_are_sent_directly() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ledger = CostLedger::new();
        let out = brw_to_top(20, 3, &mut rng, &mut ledger).unwrap();
        assert_eq!(out.end, 23);
        assert_eq!(out.ledger.energy, 3.0);
        let out = brw_to_top(1, 1, &mut rng, &mut CostLedger::new()).unwrap();
        assert_eq!(out.ledger.energy, 1.0);
        assert!(brw_to_top(2, 3, &mut rng, &mut ledger).is_err());
    }

    #[test]
    fn long_gaps_always_reach_the_top() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut total = 0.0;
        for _ in 0..1000 {
            let out = brw_to_top(13, 13, &mut rng, &mut CostLedger::new()).unwrap();
            assert_eq!(out.end, 26);
            total += out.ledger.energy;
        }
        assert!(total / 1000.0 <= 48.0);
    }

    #[test]
    fn unbiased_walk_is_free_and_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let mut hits = 0;
        for _ in 0..n {
            let out = unbiased_walk(1, 2, &mut rng, &mut CostLedger::new()).unwrap();
            assert_eq!(out.ledger.energy, 0.0);
            hits += u64::from(out.end == 2);
        }
        let f = hits as f64 / n as f64;
        assert!((f - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn batched_steps_keep_the_absorption_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 4000;
        let hits = (0..n)
            .filter(|_| {
                unbiased_walk(100, 400, &mut rng, &mut CostLedger::new())
                    .unwrap()
                    .end
                    == 400
            })
            .count();
        let f = hits as f64 / n as f64;
        assert!((f - 0.25).abs() < 4.0 * (0.1875 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn grid_rounding() {
        let g = Grid::new(512).unwrap();
        assert_eq!(g.round_up(0.25), 256);
        assert_eq!(g.round_up(0.002), 3);
        assert_eq!(g.round_up(1e-9), 1);
        assert!((g.spacing() - 1.0 / 1024.0).abs() < 1e-18);
    }
}
