use std::f64::consts::LN_2;

use bsclab::compressor::{ChunkParams, CountDistribution, ProductCountDistribution};
use bsclab::energy::{brw_to_top, unbiased_walk, Grid};
use bsclab::infotheory::{ine_bounds, kl_bernoulli, table1_bound};
use bsclab::protocol::CostLedger;
use bsclab::verify::trace_threshold;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn threshold_witnesses_hold_exhaustively() {
    for gamma in (2..=24).step_by(2) {
        let half = gamma / 2;
        for c in [0.5, 0.3, 0.45, 0.1] {
            let dist = ProductCountDistribution::binomial(half, c);
            for budget in 0..=gamma as i64 {
                for m_x in 0..=half as i64 {
                    for m_y in 0..=half as i64 {
                        let tr = trace_threshold(&dist, budget, m_x, m_y).unwrap();
                        assert_eq!(tr.answer, m_x + m_y > budget);
                        assert_eq!(tr.theta_x + tr.theta_y, budget);
                        if tr.answer {
                            assert!(m_x >= tr.theta_x && m_y >= tr.theta_y);
                        } else {
                            assert!(m_x <= tr.theta_x && m_y <= tr.theta_y);
                        }
                        assert_eq!(tr.bits, 4 * u64::from(tr.rounds));
                    }
                }
            }
        }
    }
}

#[test]
fn grid_rounding_costs_at_most_twice_the_spacing() {
    // Raising the prior from q to the next grid point q' changes the
    // divergence by at most 2 (q' - q) / (1 - q'), in nats and in bits.
    for n in [16u64, 64, 512] {
        let grid = Grid::new(n).unwrap();
        for i in 1..=99 {
            let p = i as f64 / 100.0;
            for j in 1..=500 {
                let q = j as f64 / 1000.0 - 1e-4;
                let q_up = grid.value(grid.round_up(q));
                assert!(q_up >= q && q_up - q <= grid.spacing() + 1e-12);
                let bound = 2.0 * (q_up - q) / (1.0 - q_up);
                let delta = kl_bernoulli(p, q_up) - kl_bernoulli(p, q);
                assert!(delta * LN_2 <= bound + 1e-12, "nats at ({p}, {q})");
                assert!(delta <= bound + 1e-12, "bits at ({p}, {q})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn threshold_on_random_products(
        wx in proptest::collection::vec(0.0f64..1.0, 1..9),
        wy in proptest::collection::vec(0.0f64..1.0, 1..9),
        budget in 0i64..16,
        seed in any::<u64>(),
    ) {
        prop_assume!(wx.iter().sum::<f64>() > 0.0 && wy.iter().sum::<f64>() > 0.0);
        let dx = CountDistribution::from_weights(wx.clone()).unwrap();
        let dy = CountDistribution::from_weights(wy.clone()).unwrap();
        let dist = ProductCountDistribution::new(dx.clone(), dy.clone());
        let m_x = (seed % wx.len() as u64) as i64;
        let m_y = ((seed >> 32) % wy.len() as u64) as i64;
        prop_assume!(dx.prob(m_x) > 0.0 && dy.prob(m_y) > 0.0);
        let tr = trace_threshold(&dist, budget, m_x, m_y).unwrap();
        prop_assert_eq!(tr.answer, m_x + m_y > budget);
        prop_assert_eq!(tr.theta_x + tr.theta_y, budget);
    }

    #[test]
    fn divergence_sandwich_and_table_bounds(p in 0.0f64..=1.0, q in 0.001f64..0.999) {
        let d = kl_bernoulli(p, q);
        prop_assert!(d >= 0.0);
        let (lo, hi) = ine_bounds(p, q).unwrap();
        prop_assert!(lo <= LN_2 * d + 1e-12 && LN_2 * d <= hi + 1e-12);
        prop_assert!(table1_bound(p, q).unwrap().bound <= d + 1e-12);
    }

    #[test]
    fn biased_walk_always_reaches_the_top(a in 1u64..300, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let b = ((a as f64 * frac) as u64).max(1).min(a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ledger = CostLedger::new();
        let out = brw_to_top(a, b, &mut rng, &mut ledger).unwrap();
        prop_assert_eq!(out.end, a + b);
        prop_assert!(ledger.energy >= 0.0);
        prop_assert_eq!(ledger.bits_sent, out.ledger.bits_sent);
    }

    #[test]
    fn unbiased_walk_ends_at_a_boundary(top in 1u64..400, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let a = (top as f64 * frac) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = unbiased_walk(a, top, &mut rng, &mut CostLedger::new()).unwrap();
        prop_assert!(out.end == 0 || out.end == top);
        prop_assert_eq!(out.ledger.energy, 0.0);
    }

    #[test]
    fn default_parameters_admit_valid_chunks(k in 1u32..40) {
        let eps = 0.1 / f64::from(k);
        let params = ChunkParams::for_epsilon(eps);
        prop_assert!(params.t >= params.high_sup() * (1.0 - 1e-12));
        prop_assert!(params.t <= 6f64.exp() * (1.0 + 1e-12));
        prop_assert_eq!(params.gamma % 2, 0);
    }
}
