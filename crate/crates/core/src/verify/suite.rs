//! The acceptance battery: twelve numbered checks, each returning a
//! [`CriterionReport`] with its verdict and the measured quantities.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::class::{exact_chunk_distribution, trace_threshold, ClassLaw};
use super::gof::{bonferroni, chi_square_gof, SIGNIFICANCE};
use super::monte::monte_carlo_chunk;
use crate::compressor::{
    simulate_noiseless_with, ChunkParams, ProductCountDistribution, SimulationOptions,
};
use crate::energy::{
    brw_to_top, distributional_energy_cost, noiseless_from_noisy, sample_with_prior, unbiased_walk,
    NoisySimulator,
};
use crate::error::Result;
use crate::infotheory::{
    external_info_cost, ine_bounds, kl_bernoulli, table1_bound, FiniteJoint, InputDist,
    Table1Region,
};
use crate::protocol::{CostLedger, NodeRule, Party, ProtocolSpec, RandomSource, TableBuilder};

pub const CRITERIA: [u8; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

/// Seed and sample-size scaling for a suite run. `scale = 1` uses the full
/// sample sizes; smaller values give quicker, lower-power runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            scale: 1.0,
        }
    }
}

impl SuiteConfig {
    fn samples(&self, full: u64, floor: u64) -> u64 {
        ((full as f64 * self.scale).round() as u64)
            .max(floor)
            .min(full.max(floor))
    }

    fn seed_for(&self, id: u8) -> u64 {
        self.seed
            .wrapping_mul(1_000_003)
            .wrapping_add(u64::from(id) << 32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<BTreeMap<String, Value>>,
    /// Smallest p-value among the statistical tests, if any.
    pub p_value: Option<f64>,
}

impl CriterionReport {
    fn new(id: u8, name: &str) -> Self {
        Self {
            id,
            name: name.to_string(),
            passed: true,
            detail: String::new(),
            metrics: BTreeMap::new(),
            rows: Vec::new(),
            p_value: None,
        }
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    /// Records a sub-check; the report fails if any sub-check fails.
    fn check(&mut self, ok: bool, what: String) {
        if !ok {
            self.passed = false;
        }
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(if ok { "ok " } else { "FAIL " });
        self.detail.push_str(&what);
    }

    fn p(&mut self, p: f64) {
        self.p_value = Some(self.p_value.map_or(p, |q| q.min(p)));
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "chunk exactness (analytic)",
        2 => "chunk exactness (statistical)",
        3 => "end-to-end compression",
        4 => "threshold protocol",
        5 => "per-round acceptance masses",
        6 => "biased random walk",
        7 => "unbiased random walk",
        8 => "sampling with a prior",
        9 => "energy lower bound construction",
        10 => "energy upper bound construction",
        11 => "divergence bounds",
        12 => "information cost chain rule",
        _ => "unknown",
    }
}

/// Runs one criterion; errors become a failed report.
pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let result = match id {
        1 => chunk_exact(),
        2 => chunk_statistical(cfg),
        3 => end_to_end(cfg),
        4 => threshold_check(cfg),
        5 => round_masses(),
        6 => biased_walk(cfg),
        7 => unbiased(cfg),
        8 => prior_grid(cfg),
        9 => lower_construction(cfg),
        10 => upper_construction(cfg),
        11 => divergence_bounds(),
        12 => chain_rule(cfg),
        _ => Err(crate::Error::Parameter(format!("no criterion {id}"))),
    };
    let mut report = result.unwrap_or_else(|e| {
        let mut r = CriterionReport::new(id, criterion_name(id));
        r.check(false, format!("aborted: {e}"));
        r
    });
    report.metric("wall_clock_seconds", start.elapsed().as_secs_f64());
    report
}

pub fn run_suite(cfg: &SuiteConfig, ids: &[u8]) -> Vec<CriterionReport> {
    ids.iter().map(|&id| run_criterion(id, cfg)).collect()
}

/// Random table protocol with binary-or-larger inputs. Each node's bit is
/// deterministic or a biased coin; with `noisy`, each node also gets a
/// random crossover in `[0, 1/2]`.
pub fn random_table_protocol(
    rounds: usize,
    nx: usize,
    ny: usize,
    noisy: bool,
    rng: &mut impl Rng,
) -> ProtocolSpec {
    let mut b = TableBuilder::new(rounds, nx, ny);
    for depth in 0..rounds {
        let party = Party::alternating(depth);
        let inputs = if party == Party::Alice { nx } else { ny };
        for index in 0..(1usize << depth) {
            let prefix: Vec<u8> = (0..depth).rev().map(|k| ((index >> k) & 1) as u8).collect();
            for input in 0..inputs {
                let p_one = match rng.random_range(0..4) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.random::<f64>(),
                };
                let crossover = if noisy {
                    0.5 * rng.random::<f64>()
                } else {
                    0.0
                };
                b.set(party, input, &prefix, NodeRule { p_one, crossover });
            }
        }
    }
    b.build()
}

fn chunk_exact() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(1, criterion_name(1));
    let start = Instant::now();
    let params = ChunkParams::with_gamma(0.1, 20);
    let exact = exact_chunk_distribution(&params)?;
    let target = ClassLaw::binomial_product(params.half(), params.crossover());
    let diff = exact.law.max_abs_diff(&target);
    let secs = start.elapsed().as_secs_f64();
    r.metric("max_abs_diff", diff);
    r.metric("exact_wall_clock_seconds", secs);
    r.metric("t", params.t);
    r.metric("theta", params.theta);
    r.check(
        diff <= 1e-10,
        format!("max |exact - Bin(10, 0.4)^2| = {diff:.3e} <= 1e-10"),
    );
    r.check(secs < 1.0, format!("computed in {secs:.3} s < 1 s"));
    let high = exact.high.restrict(|m| m > params.budget() as usize);
    let high_target = target.restrict(|m| m > params.budget() as usize);
    let hd = high.max_abs_diff(&high_target);
    r.metric("high_branch_diff", hd);
    r.check(
        hd <= 1e-10,
        format!("high branch matches the channel law above the budget ({hd:.3e})"),
    );
    Ok(r)
}

fn chunk_statistical(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(2, criterion_name(2));
    let params = ChunkParams::with_gamma(0.1, 20).with_minimal_t();
    let seed = cfg.seed_for(2);
    let n = cfg.samples(50_000, 2_000);
    let spec = ProtocolSpec::seeded(20, 2, 2, seed);
    let exact = exact_chunk_distribution(&params)?;
    let mc = monte_carlo_chunk(&params, &spec, 1, 0, n, seed)?;
    let gof = chi_square_gof(&mc.counts, &exact.law.probs, SIGNIFICANCE);
    r.p(gof.p_value);
    r.metric("trials", n as f64);
    r.metric("t", params.t);
    r.metric("chi_square", gof.statistic);
    r.metric("p_value", gof.p_value);
    r.metric("mean_bits", mc.mean_bits);
    r.metric("p95_bits", mc.p95_bits as f64);
    let expected_high = params.t * params.t / (1.0 - params.low_mass());
    let high = mc.mean_high_rounds();
    r.metric("mean_high_rounds", high);
    r.metric("expected_high_rounds", expected_high);
    r.metric("mean_low_rounds", mc.mean_low_rounds());
    r.metric("mean_threshold_rounds", mc.mean_threshold_rounds());
    r.check(
        mc.failures.is_empty(),
        format!("{} aborted trials", mc.failures.len()),
    );
    r.check(
        gof.pass,
        format!(
            "chi-square p = {:.4} >= {SIGNIFICANCE} over {} cells",
            gof.p_value, gof.cells
        ),
    );
    r.check(
        (high / expected_high - 1.0).abs() <= 0.1,
        format!("mean high-branch rounds {high:.3} within 10% of t^2/(1-p) = {expected_high:.3}"),
    );
    r.check(
        mc.mean_threshold_rounds() <= 2.0,
        format!(
            "mean threshold rounds {:.4} <= 2",
            mc.mean_threshold_rounds()
        ),
    );
    Ok(r)
}

struct EndToEnd {
    counts: Vec<Vec<u64>>,
    laws: Vec<ClassLaw>,
    mean_bits: f64,
    bits_per_chunk: f64,
    failures: usize,
}

fn end_to_end_run(rounds: usize, trials: u64, seed: u64) -> Result<EndToEnd> {
    let epsilon = 0.1;
    let spec = ProtocolSpec::seeded(rounds, 2, 2, seed);
    let options = SimulationOptions {
        beta: Some(0.125),
        ..SimulationOptions::default()
    };
    let runs: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomSource::for_trial(seed, i);
            simulate_noiseless_with(&spec, 1, 0, epsilon, &options, &mut rng)
        })
        .collect();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    let mut laws: Vec<ClassLaw> = Vec::new();
    let mut bits = 0u64;
    let mut chunks = 0usize;
    let mut ok = 0u64;
    let mut failures = 0;
    for run in runs {
        let Ok(sim) = run else {
            failures += 1;
            continue;
        };
        ok += 1;
        bits += sim.ledger.bits_sent;
        chunks += sim.chunks.len();
        for (k, c) in sim.chunks.iter().enumerate() {
            if k == laws.len() {
                let law = ClassLaw::binomial_product(c.len / 2, 0.5 - epsilon);
                counts.push(vec![0; law.probs.len()]);
                laws.push(law);
            }
            let i = laws[k].index(c.errors.m_x, c.errors.m_y);
            counts[k][i] += 1;
        }
    }
    Ok(EndToEnd {
        counts,
        laws,
        mean_bits: bits as f64 / ok.max(1) as f64,
        bits_per_chunk: bits as f64 / chunks.max(1) as f64,
        failures,
    })
}

fn end_to_end(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(3, criterion_name(3));
    let trials = cfg.samples(200, 20);
    let seed = cfg.seed_for(3);
    let short = end_to_end_run(200, trials, seed)?;
    let long = end_to_end_run(400, trials, seed.wrapping_add(1 << 20))?;
    let tests = short.laws.len() + long.laws.len();
    let level = bonferroni(tests);
    r.metric("trials", trials as f64);
    r.metric("bonferroni_level", level);
    for (label, run) in [("t200", &short), ("t400", &long)] {
        r.check(
            run.failures == 0,
            format!("{label}: {} aborted trials", run.failures),
        );
        r.metric(&format!("{label}_mean_bits"), run.mean_bits);
        r.metric(&format!("{label}_bits_per_chunk"), run.bits_per_chunk);
        for (k, (counts, law)) in run.counts.iter().zip(&run.laws).enumerate() {
            let gof = chi_square_gof(counts, &law.probs, level);
            r.p(gof.p_value);
            r.metric(&format!("{label}_chunk{k}_p_value"), gof.p_value);
            r.check(
                gof.pass,
                format!("{label} chunk {k}: p = {:.4} >= {level:.2e}", gof.p_value),
            );
        }
        r.check(
            run.bits_per_chunk.is_finite(),
            format!("{label}: {:.1} bits per chunk", run.bits_per_chunk),
        );
    }
    let ratio = long.mean_bits / short.mean_bits;
    r.metric("bits_ratio", ratio);
    r.check(
        (1.6..=2.4).contains(&ratio),
        format!("bits(T=400) / bits(T=200) = {ratio:.3} in [1.6, 2.4]"),
    );
    Ok(r)
}

fn threshold_check(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(4, criterion_name(4));
    let budget = 4i64;
    let half = 10usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed_for(4));
    let samples = cfg.samples(10_000, 1_000);
    for (label, c) in [("uniform", 0.5), ("bsc_0.3", 0.3)] {
        let dist = ProductCountDistribution::binomial(half, c);
        let mut bad = Vec::new();
        for m_x in 0..=half as i64 {
            for m_y in 0..=half as i64 {
                let tr = trace_threshold(&dist, budget, m_x, m_y)?;
                let answer_ok = tr.answer == (m_x + m_y > budget);
                let sum_ok = tr.theta_x + tr.theta_y == budget;
                let witness_ok = if tr.answer {
                    m_x >= tr.theta_x && m_y >= tr.theta_y
                } else {
                    m_x <= tr.theta_x && m_y <= tr.theta_y
                };
                let bits_ok = tr.bits == 4 * u64::from(tr.rounds);
                if !(answer_ok && sum_ok && witness_ok && bits_ok) {
                    bad.push(format!("({m_x}, {m_y})"));
                }
            }
        }
        r.check(
            bad.is_empty(),
            format!("{label}: 121 pairs exhaustive, violations {bad:?}"),
        );
        let mut rounds = 0u64;
        for _ in 0..samples {
            let mut draw = || (0..half).filter(|_| rng.random::<f64>() < c).count() as i64;
            let (m_x, m_y) = (draw(), draw());
            rounds += u64::from(trace_threshold(&dist, budget, m_x, m_y)?.rounds);
        }
        let mean = rounds as f64 / samples as f64;
        r.metric(&format!("{label}_mean_rounds"), mean);
        r.check(
            mean <= 2.0,
            format!("{label}: mean rounds {mean:.4} <= 2 over {samples} pairs"),
        );
    }
    Ok(r)
}

fn round_masses() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(5, criterion_name(5));
    for (gamma, eps) in [(20usize, 0.1), (8, 0.05)] {
        let params = ChunkParams::with_gamma(eps, gamma);
        let exact = exact_chunk_distribution(&params)?;
        let dl = (exact.low_round_mass - params.low_accept_mass()).abs();
        let dh = (exact.high_round_mass - params.high_accept_mass()).abs();
        let tag = format!("g{gamma}_e{eps}");
        r.metric(&format!("{tag}_low_mass"), exact.low_round_mass);
        r.metric(&format!("{tag}_high_mass"), exact.high_round_mass);
        r.metric(&format!("{tag}_low_diff"), dl);
        r.metric(&format!("{tag}_high_diff"), dh);
        r.check(
            dl <= 1e-12,
            format!("γ={gamma}, ε={eps}: |sum - p R| = {dl:.2e}"),
        );
        r.check(
            dh <= 1e-12,
            format!("γ={gamma}, ε={eps}: |sum - (1-p)/t^2| = {dh:.2e}"),
        );
    }
    Ok(r)
}

fn biased_walk(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(6, criterion_name(6));
    let runs = cfg.samples(500, 20);
    let seed = cfg.seed_for(6);
    let pairs: Vec<(u64, u64)> = (1..=40u64)
        .flat_map(|a| (1..=a).map(move |b| (a, b)))
        .collect();
    let results: Vec<Result<(u64, u64, u64, f64)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let mut absorbed = 0;
            let mut energy = 0.0;
            for _ in 0..runs {
                let out = brw_to_top(a, b, &mut rng, &mut CostLedger::new())?;
                absorbed += u64::from(out.end == a + b);
                energy += out.ledger.energy;
            }
            Ok((a, b, absorbed, energy / runs as f64))
        })
        .collect();
    let mut absorbed_all = 0u64;
    let mut pooled = 0.0;
    let mut worst: (f64, u64, u64) = (0.0, 0, 0);
    for res in results {
        let (a, b, absorbed, mean) = res?;
        absorbed_all += absorbed;
        pooled += mean;
        if mean > worst.0 {
            worst = (mean, a, b);
        }
        r.rows.push(BTreeMap::from([
            ("a".to_string(), json!(a)),
            ("b".to_string(), json!(b)),
            ("absorbed".to_string(), json!(absorbed)),
            ("mean_energy".to_string(), json!(mean)),
        ]));
    }
    let total = runs * pairs.len() as u64;
    pooled /= pairs.len() as f64;
    r.metric("runs", total as f64);
    r.metric("pooled_mean_energy", pooled);
    r.metric("max_pair_mean_energy", worst.0);
    r.check(
        absorbed_all == total,
        format!("absorbed at a+b in {absorbed_all}/{total} runs"),
    );
    r.check(
        pooled <= 48.0,
        format!("pooled mean energy {pooled:.3} <= 48"),
    );
    r.detail.push_str(&format!(
        "; largest per-pair mean {:.3} at (a={}, b={})",
        worst.0, worst.1, worst.2
    ));
    Ok(r)
}

fn unbiased(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(7, criterion_name(7));
    let n = cfg.samples(100_000, 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed_for(7));
    let mut top = 0u64;
    let mut energy = 0.0;
    for _ in 0..n {
        let out = unbiased_walk(3, 4, &mut rng, &mut CostLedger::new())?;
        top += u64::from(out.end == 4);
        energy += out.ledger.energy;
    }
    let freq = top as f64 / n as f64;
    let tol = 3.0 * (0.75f64 * 0.25 / n as f64).sqrt();
    r.metric("top_frequency", freq);
    r.metric("tolerance", tol);
    r.metric("energy", energy);
    r.check(
        (freq - 0.75).abs() <= tol,
        format!("top frequency {freq:.5} within 0.75 ± {tol:.4}"),
    );
    r.check(energy == 0.0, format!("total energy {energy}"));
    Ok(r)
}

fn prior_grid(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(8, criterion_name(8));
    let n_i = 512u64;
    let slack = 1.0 / (2 * n_i) as f64;
    let n = cfg.samples(50_000, 5_000);
    let seed = cfg.seed_for(8);
    let grid = [
        (0.3, 0.2),
        (0.25, 0.25),
        (0.01, 0.002),
        (0.6, 0.25),
        (0.05, 0.005),
    ];
    for (k, &(p, q)) in grid.iter().enumerate() {
        let base = seed.wrapping_add((k as u64) << 24);
        let draws: Vec<Result<(u8, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomSource::for_trial(base, i);
                let s = sample_with_prior(p, q, n_i, &mut rng, &mut CostLedger::new())?;
                Ok((s.bit, s.ledger.energy))
            })
            .collect();
        let mut ones = 0u64;
        let mut energy = 0.0;
        for d in draws {
            let (bit, e) = d?;
            ones += u64::from(bit);
            energy += e;
        }
        let mean = ones as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let energy = energy / n as f64;
        let div = kl_bernoulli(p, q);
        let ratio = energy / (div + slack);
        let tag = format!("p{p}_q{q}");
        r.metric(&format!("{tag}_mean"), mean);
        r.metric(&format!("{tag}_energy"), energy);
        r.metric(&format!("{tag}_divergence"), div);
        r.metric(&format!("{tag}_ratio"), ratio);
        r.rows.push(BTreeMap::from([
            ("p".to_string(), json!(p)),
            ("q".to_string(), json!(q)),
            ("mean".to_string(), json!(mean)),
            ("energy".to_string(), json!(energy)),
            ("divergence_bits".to_string(), json!(div)),
            ("ratio".to_string(), json!(ratio)),
        ]));
        r.check(
            (mean - p).abs() <= 3.0 * sigma,
            format!(
                "({p}, {q}): mean {mean:.5} within 3σ = {:.5} of p",
                3.0 * sigma
            ),
        );
        r.check(
            ratio <= 200.0,
            format!("({p}, {q}): energy / (D + 1/1024) = {ratio:.2} <= 200"),
        );
    }
    Ok(r)
}

fn lower_construction(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(9, criterion_name(9));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed_for(9));
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..100 {
        let rounds = rng.random_range(1..=3);
        let pi = random_table_protocol(rounds, 2, 2, true, &mut rng);
        let mu = InputDist::random(2, 2, &mut rng);
        let ic = external_info_cost(&noiseless_from_noisy(&pi), &mu)?.direct;
        let ec = distributional_energy_cost(&pi, &mu)? / LN_2;
        worst = worst.max(ic - ec);
        if ic > ec + 1e-9 {
            violations += 1;
        }
    }
    r.metric("max_ic_minus_ec", worst);
    r.check(violations == 0, format!("IC(φ) <= EC(π)/ln 2 + 1e-9 in 100 instances ({violations} violations, max gap {worst:.3e})"));
    Ok(r)
}

fn upper_construction(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(10, criterion_name(10));
    let n_grid = 256u64;
    let n = cfg.samples(50_000, 5_000);
    let seed = cfg.seed_for(10);
    let mu = InputDist::uniform(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = bonferroni(3);
    for k in 0..3u64 {
        let phi = random_table_protocol(2, 2, 2, false, &mut rng);
        let joint = FiniteJoint::from_protocol(&phi, &mu)?;
        let ic = external_info_cost(&phi, &mu)?.direct;
        let base = seed.wrapping_add((k + 1) << 24);
        let chunk = 1_000u64;
        let partials: Vec<Result<(Vec<u64>, f64)>> = (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut sim = NoisySimulator::new(&phi, &mu, n_grid)?;
                let mut counts = vec![0u64; joint.probs.len()];
                let mut energy = 0.0;
                for i in c * chunk..((c + 1) * chunk).min(n) {
                    let mut rng = RandomSource::for_trial(base, i);
                    let x = rng.alice.random_range(0..2usize);
                    let y = rng.bob.random_range(0..2usize);
                    let run = sim.run(x, y, &mut rng)?;
                    counts[(x * 2 + y) * joint.leaves() + run.transcript.to_index() as usize] += 1;
                    energy += run.ledger.energy;
                }
                Ok((counts, energy))
            })
            .collect();
        let mut counts = vec![0u64; joint.probs.len()];
        let mut energy = 0.0;
        for part in partials {
            let (c, e) = part?;
            counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
            energy += e;
        }
        let energy = energy / n as f64;
        let ratio = energy / (ic + 1.0 / (2 * n_grid) as f64);
        let gof = chi_square_gof(&counts, &joint.probs, level);
        r.p(gof.p_value);
        r.metric(&format!("protocol{k}_ic"), ic);
        r.metric(&format!("protocol{k}_energy"), energy);
        r.metric(&format!("protocol{k}_ratio"), ratio);
        r.metric(&format!("protocol{k}_p_value"), gof.p_value);
        r.check(
            gof.pass,
            format!(
                "protocol {k}: joint law p = {:.4} >= {level:.2e}",
                gof.p_value
            ),
        );
        r.check(
            ratio <= 1e4,
            format!("protocol {k}: energy / (IC + 1/512) = {ratio:.2} <= 1e4"),
        );
    }
    Ok(r)
}

/// Sample points for each divergence region, `side * side` per region.
pub fn table1_grid(side: usize) -> Vec<(Table1Region, f64, f64)> {
    let s = side as f64;
    let mut out = Vec::with_capacity(4 * side * side);
    for i in 0..side {
        for j in 0..side {
            let (u, v) = ((i as f64 + 0.5) / s, (j as f64 + 0.5) / s);
            let q = 0.5 * u;
            out.push((
                Table1Region::Near,
                (2.0 * q).min(1.0) * (j as f64 / (s - 1.0)),
                q,
            ));
            let q = 0.01 * u;
            out.push((Table1Region::SmallFar, 2.0 * q + (0.02 - 2.0 * q) * v, q));
            let q = 0.01 + 0.48 * (i as f64 / (s - 1.0));
            out.push((
                Table1Region::FarModerate,
                (2.0 * q + (1.0 - 2.0 * q) * (j as f64 + 1.0) / s).min(1.0),
                q,
            ));
            let q = 0.01 * u;
            out.push((
                Table1Region::FarSmallPrior,
                0.02 + 0.98 * (j as f64 / (s - 1.0)),
                q,
            ));
        }
    }
    out
}

fn divergence_bounds() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(11, criterion_name(11));
    let mut ine_bad = 0;
    for i in 1..=99 {
        for j in 1..=99 {
            let (p, q) = (i as f64 / 100.0, j as f64 / 100.0);
            let (lo, hi) = ine_bounds(p, q)?;
            let d = LN_2 * kl_bernoulli(p, q);
            if lo > d + 1e-12 || d > hi + 1e-12 {
                ine_bad += 1;
            }
        }
    }
    r.check(
        ine_bad == 0,
        format!("ine sandwich on the 99x99 grid ({ine_bad} violations)"),
    );
    let mut per_region: BTreeMap<&str, (u64, u64, f64)> = BTreeMap::new();
    for (region, p, q) in table1_grid(100) {
        let b = table1_bound(p, q)?;
        let d = kl_bernoulli(p, q);
        let e = per_region
            .entry(region.label())
            .or_insert((0, 0, f64::INFINITY));
        e.0 += 1;
        if b.region != region || b.bound > d {
            e.1 += 1;
        }
        e.2 = e.2.min(d - b.bound);
    }
    for (label, (n, bad, slack)) in per_region {
        r.metric(&format!("{label} min slack"), slack);
        r.check(
            bad == 0,
            format!("{label}: bound <= D at {n} points ({bad} violations)"),
        );
    }
    Ok(r)
}

fn chain_rule(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(12, criterion_name(12));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed_for(12));
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rounds = rng.random_range(1..=4);
        let nx = rng.random_range(2..=3);
        let ny = rng.random_range(2..=3);
        let spec = random_table_protocol(rounds, nx, ny, false, &mut rng);
        let mu = InputDist::random(nx, ny, &mut rng);
        worst = worst.max(external_info_cost(&spec, &mu)?.spread());
    }
    r.metric("max_spread", worst);
    r.check(
        worst <= 1e-9,
        format!("three routes agree within {worst:.2e} <= 1e-9 on 50 protocols"),
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_grid_lands_in_its_regions() {
        for (region, p, q) in table1_grid(20) {
            assert_eq!(table1_bound(p, q).unwrap().region, region, "({p}, {q})");
        }
    }

    #[test]
    fn random_protocols_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for rounds in 1..=4 {
            let spec = random_table_protocol(rounds, 2, 3, true, &mut rng);
            spec.validate().unwrap();
            assert_eq!(spec.rounds(), rounds);
        }
    }

    #[test]
    fn quick_criteria() {
        let cfg = SuiteConfig {
            seed: 3,
            scale: 0.01,
        };
        for id in [1, 5, 7, 11, 12] {
            let rep = run_criterion(id, &cfg);
            assert!(rep.passed, "{}: {}", rep.name, rep.detail);
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(13, &SuiteConfig::default()).passed);
    }
}
