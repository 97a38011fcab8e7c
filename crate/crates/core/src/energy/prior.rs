use rand::Rng;
use serde::{Deserialize, Serialize};

use super::walk::{climb, unbiased_walk, Grid};
use crate::error::{Error, Result};
use crate::protocol::{CostLedger, RandomSource};

/// Which sampler handled a bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorCase {
    /// The prior is a point mass on the target; nothing is sent.
    Degenerate,
    /// `p <= 2q'`: unbiased walk to the middle.
    Near,
    /// `2q' < p < 0.02` and `q' < 0.01`: unbiased walk part way, then
    /// biased doublings.
    SmallFar,
    /// Everything else: biased doublings from the prior to the middle.
    Far,
}

impl PriorCase {
    pub fn label(&self) -> &'static str {
        match self {
            PriorCase::Degenerate => "q = 0",
            PriorCase::Near => "p <= 2q",
            PriorCase::SmallFar => "2q < p < 0.02, q < 0.01",
            PriorCase::Far => "otherwise",
        }
    }
}

/// One bit sampled against a shared prior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitWithPrior {
    pub bit: u8,
    pub p: f64,
    pub q: f64,
    /// Grid-rounded prior after relabeling so that it is at most 1/2.
    pub q_rounded: f64,
    pub case: PriorCase,
    pub ledger: CostLedger,
}

/// Sends a Bernoulli(`p`) bit known to the sender when both parties share
/// the prior `q`, paying energy roughly proportional to the divergence of
/// `p` from `q`. The prior is rounded up to the grid of resolution `n_i`.
pub fn sample_with_prior(
    p: f64,
    q: f64,
    n_i: u64,
    rng: &mut RandomSource,
    ledger: &mut CostLedger,
) -> Result<BitWithPrior> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::Parameter(format!(
            "probabilities ({p}, {q}) outside [0, 1]"
        )));
    }
    let grid = Grid::new(n_i)?;
    let start = *ledger;
    let swap = q > 0.5;
    let (tp, tq) = if swap { (1.0 - p, 1.0 - q) } else { (p, q) };
    let done = |bit: u8, q_rounded: f64, case: PriorCase, ledger: &CostLedger| BitWithPrior {
        bit: bit ^ u8::from(swap),
        p,
        q,
        q_rounded,
        case,
        ledger: ledger.since(&start),
    };
    if tq == 0.0 {
        if tp != 0.0 {
            return Err(Error::Domain(format!(
                "target {p} is impossible under the point-mass prior {q}"
            )));
        }
        return Ok(done(0, 0.0, PriorCase::Degenerate, ledger));
    }
    let k = grid.round_up(tq);
    let q_rounded = grid.value(k);
    let rng_ch = &mut rng.channel;
    let (case, lambda) = if tp <= 2.0 * q_rounded {
        let walk = unbiased_walk(k, n_i, rng_ch, ledger)?;
        if walk.end == 0 {
            return Ok(done(0, q_rounded, PriorCase::Near, ledger));
        }
        (PriorCase::Near, tp * n_i as f64 / k as f64)
    } else if tp < 0.02 && q_rounded < 0.01 {
        let s = ((k as f64 / tp).floor() as u64).clamp(k, n_i);
        let walk = unbiased_walk(k, s, rng_ch, ledger)?;
        if walk.end == 0 {
            return Ok(done(0, q_rounded, PriorCase::SmallFar, ledger));
        }
        climb(s, n_i, rng_ch, ledger)?;
        (PriorCase::SmallFar, tp * s as f64 / k as f64)
    } else {
        climb(k, n_i, rng_ch, ledger)?;
        (PriorCase::Far, tp)
    };
    let bit = final_bit(lambda.min(1.0), rng_ch, ledger);
    Ok(done(bit, q_rounded, case, ledger))
}

/// Sends one bit received as 1 with probability `lambda`, choosing the
/// transmitted symbol so that the crossover is at most 1/2.
fn final_bit(lambda: f64, rng: &mut impl Rng, ledger: &mut CostLedger) -> u8 {
    let (sent, crossover) = if lambda >= 0.5 {
        (1u8, 1.0 - lambda)
    } else {
        (0u8, lambda)
    };
    ledger.charge(crossover);
    let flipped = rng.random::<f64>() < crossover;
    sent ^ u8::from(flipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::bit_energy;

    #[test]
    fn zero_prior_sends_nothing() {
        let mut ledger = CostLedger::new();
        let s = sample_with_prior(0.0, 0.0, 16, &mut RandomSource::new(0), &mut ledger).unwrap();
        assert_eq!((s.bit, s.case), (0, PriorCase::Degenerate));
        assert_eq!(ledger, CostLedger::new());
        assert!(sample_with_prior(0.1, 0.0, 16, &mut RandomSource::new(0), &mut ledger).is_err());
        let s = sample_with_prior(1.0, 1.0, 16, &mut RandomSource::new(0), &mut ledger).unwrap();
        assert_eq!(s.bit, 1);
    }

    #[test]
    fn matching_prior_costs_nothing() {
        let mut total = 0.0;
        for seed in 0..200 {
            let s = sample_with_prior(
                0.25,
                0.25,
                512,
                &mut RandomSource::new(seed),
                &mut CostLedger::new(),
            )
            .unwrap();
            assert_eq!(s.case, PriorCase::Near);
            total += s.ledger.energy;
        }
        assert_eq!(total, 0.0);
    }

    #[test]
    fn dispatch_regions() {
        let case = |p, q| {
            sample_with_prior(p, q, 512, &mut RandomSource::new(1), &mut CostLedger::new())
                .unwrap()
                .case
        };
        assert_eq!(case(0.3, 0.2), PriorCase::Near);
        assert_eq!(case(0.01, 0.002), PriorCase::SmallFar);
        assert_eq!(case(0.6, 0.25), PriorCase::Far);
        assert_eq!(case(0.05, 0.005), PriorCase::Far);
        assert_eq!(case(0.7, 0.8), PriorCase::Near);
    }

    #[test]
    fn final_bit_energy() {
        let mut ledger = CostLedger::new();
        let mut rng = RandomSource::new(2);
        final_bit(0.75, &mut rng.channel, &mut ledger);
        assert!((ledger.energy - bit_energy(0.25)).abs() < 1e-15);
    }
}
