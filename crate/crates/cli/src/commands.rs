use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use bsclab::compressor::{
    simulate_noiseless_with, ChunkParams, CountDistribution, SimulationOptions,
};
use bsclab::energy::{
    brw_to_top, distributional_energy_cost, noiseless_from_noisy, sample_with_prior, unbiased_walk,
    NoisySimulator,
};
use bsclab::infotheory::{external_info_cost, kl_bernoulli, FiniteJoint, InputDist};
use bsclab::protocol::{CostLedger, ProtocolSpec, RandomSource};
use bsclab::report::{ReportDocument, TestVerdict};
use bsclab::verify::{
    bonferroni, chi_square_gof, exact_chunk_distribution, monte_carlo_chunk, random_table_protocol,
    run_suite, ClassLaw, SuiteConfig, CRITERIA, SIGNIFICANCE,
};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{ChunkFlags, Common, WalkMode};

type Row = BTreeMap<String, Value>;

fn row<const N: usize>(fields: [(&str, Value); N]) -> Row {
    fields
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn load_spec(path: &Path) -> Result<ProtocolSpec> {
    ProtocolSpec::from_path(path).with_context(|| format!("reading protocol {}", path.display()))
}

/// `uniform`, or `nx * ny` comma-separated weights in row-major order.
fn parse_mu(text: &str, nx: usize, ny: usize) -> Result<InputDist> {
    if text.eq_ignore_ascii_case("uniform") {
        return Ok(InputDist::uniform(nx, ny));
    }
    let weights = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .context("--mu must be `uniform` or comma-separated weights")?;
    Ok(InputDist::from_table(nx, ny, weights)?)
}

fn sample_inputs(mu: &InputDist, rng: &mut RandomSource) -> (usize, usize) {
    let u = rng.public.random::<f64>();
    let mut acc = 0.0;
    let mut last = (0, 0);
    for (x, y) in mu.pairs() {
        let p = mu.prob(x, y);
        if p > 0.0 {
            last = (x, y);
            acc += p;
            if u < acc {
                return (x, y);
            }
        }
    }
    last
}

pub fn compress(
    c: &Common,
    epsilons: &[f64],
    lengths: &[usize],
    trials: u64,
    spec_path: Option<&Path>,
    flags: &ChunkFlags,
) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("compress");
    doc.param("epsilon", json!(epsilons))
        .param("rounds", json!(lengths))
        .param("trials", trials)
        .param("gamma", json!(flags.gamma))
        .param("theta", json!(flags.theta))
        .param("t_cap", json!(flags.t_cap))
        .param("beta", json!(flags.beta))
        .param("spec", json!(spec_path.map(|p| p.display().to_string())));
    doc.seeds = vec![c.seed];
    let options = SimulationOptions {
        gamma: flags.gamma,
        theta: flags.theta,
        t: flags.t_cap,
        beta: flags.beta,
        iteration_cap: None,
    };
    let file_spec = spec_path.map(load_spec).transpose()?;
    let lengths: Vec<usize> = match &file_spec {
        Some(s) => vec![s.rounds()],
        None => lengths.to_vec(),
    };
    let configs: Vec<(f64, usize)> = epsilons
        .iter()
        .flat_map(|&e| lengths.iter().map(move |&t| (e, t)))
        .collect();
    let level = bonferroni(configs.len());
    for (k, &(eps, rounds)) in configs.iter().enumerate() {
        let spec = match &file_spec {
            Some(s) => s.clone(),
            None => ProtocolSpec::seeded(rounds, 2, 2, c.seed),
        };
        let (nx, ny) = (spec.alice_inputs(), spec.bob_inputs());
        let base = c.seed.wrapping_add((k as u64) << 32);
        let runs: Vec<_> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let (x, y) = ((i as usize) % nx, (i as usize / nx) % ny);
                let mut rng = RandomSource::for_trial(base, i);
                simulate_noiseless_with(&spec, x, y, eps, &options, &mut rng).map(|s| (x, y, s))
            })
            .collect();
        let padded = spec.padded();
        let mut error_counts = vec![0u64; padded.rounds() + 1];
        let mut bits = 0u64;
        for (i, run) in runs.into_iter().enumerate() {
            let (x, y, sim) = run.with_context(|| format!("ε = {eps}, T = {rounds}, trial {i}"))?;
            let m: usize = sim.chunks.iter().map(|ch| ch.errors.m()).sum();
            error_counts[m] += 1;
            bits += sim.ledger.bits_sent;
            doc.rows.push(row([
                ("epsilon", json!(eps)),
                ("rounds", json!(rounds)),
                ("trial", json!(i)),
                ("x", json!(x)),
                ("y", json!(y)),
                ("bits", json!(sim.ledger.bits_sent)),
                ("chunks", json!(sim.chunks.len())),
                ("errors", json!(m)),
                ("direct", json!(sim.is_direct())),
            ]));
        }
        let law = CountDistribution::binomial(padded.rounds(), 0.5 - eps);
        let gof = chi_square_gof(&error_counts, law.pmf(), level);
        let tag = format!("eps{eps}_T{rounds}");
        let mean = bits as f64 / trials.max(1) as f64;
        doc.metric(&format!("{tag}_mean_bits"), mean);
        doc.metric(&format!("{tag}_bits_per_round"), mean / rounds as f64);
        doc.test(TestVerdict::from_gof(
            format!("{tag} error count law"),
            &gof,
        ));
    }
    Ok(doc)
}

pub fn chunk_verify(
    c: &Common,
    epsilon: f64,
    gamma: usize,
    theta: Option<f64>,
    t_cap: Option<f64>,
    beta: Option<f64>,
    samples: u64,
) -> Result<ReportDocument> {
    let mut params = ChunkParams::with_gamma(epsilon, gamma);
    if let Some(th) = theta {
        params = params.with_theta(th);
    }
    if let Some(b) = beta {
        params = params.with_beta(b);
    }
    params = match t_cap {
        Some(t) => params.with_t(t),
        None => params.with_minimal_t(),
    };
    let mut doc = ReportDocument::new("chunk-verify");
    doc.param("epsilon", epsilon)
        .param("gamma", gamma)
        .param("theta", params.theta)
        .param("t", params.t)
        .param("beta", params.beta)
        .param("samples", samples);
    doc.seeds = vec![c.seed];
    let exact = exact_chunk_distribution(&params)?;
    let target = ClassLaw::binomial_product(params.half(), params.crossover());
    let diff = exact.law.max_abs_diff(&target);
    doc.metric("max_abs_diff", diff)
        .metric("low_mass", exact.low_mass)
        .metric("low_round_mass", exact.low_round_mass)
        .metric("high_round_mass", exact.high_round_mass);
    doc.test(TestVerdict::new(
        "exact law equals the channel law",
        diff <= 1e-10,
        format!("max abs diff {diff:.3e} (limit 1e-10)"),
    ));
    let spec = ProtocolSpec::seeded(gamma, 2, 2, c.seed);
    let mc = monte_carlo_chunk(&params, &spec, 1, 0, samples, c.seed)?;
    let gof = chi_square_gof(&mc.counts, &exact.law.probs, SIGNIFICANCE);
    doc.test(TestVerdict::from_gof(
        "sampled law matches the exact law",
        &gof,
    ));
    doc.test(TestVerdict::new(
        "no aborted trials",
        mc.failures.is_empty(),
        format!("{} failures", mc.failures.len()),
    ));
    let expected_high = params.t * params.t / (1.0 - exact.low_mass);
    let high = mc.mean_high_rounds();
    if mc.high_trials > 0 {
        doc.test(TestVerdict::new(
            "high-branch rounds near t^2/(1-p)",
            (high / expected_high - 1.0).abs() <= 0.1,
            format!("mean {high:.3}, expected {expected_high:.3}"),
        ));
    }
    doc.test(TestVerdict::new(
        "threshold rounds at most 2 on average",
        mc.mean_threshold_rounds() <= 2.0,
        format!("mean {:.4}", mc.mean_threshold_rounds()),
    ));
    doc.metric("mean_bits", mc.mean_bits)
        .metric("p95_bits", mc.p95_bits as f64)
        .metric("mean_high_rounds", high)
        .metric("mean_low_rounds", mc.mean_low_rounds())
        .metric("mean_threshold_rounds", mc.mean_threshold_rounds())
        .metric("chi_square_p_value", gof.p_value);
    for (m_x, m_y) in exact.law.classes() {
        let i = exact.law.index(m_x, m_y);
        doc.rows.push(row([
            ("m_x", json!(m_x)),
            ("m_y", json!(m_y)),
            ("exact", json!(exact.law.probs[i])),
            ("count", json!(mc.counts[i])),
        ]));
    }
    Ok(doc)
}

pub fn walk(c: &Common, mode: WalkMode, a: u64, b: u64, trials: u64) -> Result<ReportDocument> {
    ensure!(trials > 0, "--trials must be positive");
    let mut doc = ReportDocument::new("walk");
    let label = match mode {
        WalkMode::Brw => "brw",
        WalkMode::Ubrw => "ubrw",
    };
    doc.param("mode", label)
        .param("a", a)
        .param("b", b)
        .param("trials", trials);
    doc.seeds = vec![c.seed];
    let top = a + b;
    let runs: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomSource::for_trial(c.seed, i);
            let mut ledger = CostLedger::new();
            match mode {
                WalkMode::Brw => brw_to_top(a, b, &mut rng.channel, &mut ledger),
                WalkMode::Ubrw => unbiased_walk(a, top, &mut rng.channel, &mut ledger),
            }
        })
        .collect();
    let mut at_top = 0u64;
    let mut energy = 0.0;
    for (i, run) in runs.into_iter().enumerate() {
        let out = run?;
        at_top += u64::from(out.end == top);
        energy += out.ledger.energy;
        doc.rows.push(row([
            ("trial", json!(i)),
            ("end", json!(out.end)),
            ("steps", json!(out.steps)),
            ("energy", json!(out.ledger.energy)),
        ]));
    }
    let mean_energy = energy / trials as f64;
    let freq = at_top as f64 / trials as f64;
    doc.metric("top_frequency", freq)
        .metric("mean_energy", mean_energy);
    match mode {
        WalkMode::Brw => {
            doc.test(TestVerdict::new(
                "every walk ends at a + b",
                at_top == trials,
                format!("{at_top}/{trials}"),
            ));
            doc.test(TestVerdict::new(
                "mean energy at most 48",
                mean_energy <= 48.0,
                format!("{mean_energy:.4}"),
            ));
        }
        WalkMode::Ubrw => {
            let p = a as f64 / top as f64;
            let tol = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
            doc.test(TestVerdict::new(
                "top reached with probability a / (a + b)",
                (freq - p).abs() <= tol,
                format!("{freq:.5} vs {p:.5} ± {tol:.5}"),
            ));
            doc.test(TestVerdict::new(
                "no energy spent",
                energy == 0.0,
                format!("{energy}"),
            ));
        }
    }
    Ok(doc)
}

pub fn sample_prior(
    c: &Common,
    ps: &[f64],
    qs: &[f64],
    grid_n: u64,
    samples: u64,
) -> Result<ReportDocument> {
    ensure!(
        ps.len() == qs.len(),
        "--p and --q need the same number of values"
    );
    ensure!(samples > 0, "--samples must be positive");
    let mut doc = ReportDocument::new("sample-prior");
    doc.param("p", json!(ps))
        .param("q", json!(qs))
        .param("grid_n", grid_n)
        .param("samples", samples);
    doc.seeds = vec![c.seed];
    let slack = 1.0 / (2 * grid_n) as f64;
    for (k, (&p, &q)) in ps.iter().zip(qs).enumerate() {
        let base = c.seed.wrapping_add((k as u64) << 32);
        let draws: Vec<_> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomSource::for_trial(base, i);
                sample_with_prior(p, q, grid_n, &mut rng, &mut CostLedger::new())
            })
            .collect();
        let mut ones = 0u64;
        let mut energy = 0.0;
        let mut case = None;
        for d in draws {
            let d = d?;
            ones += u64::from(d.bit);
            energy += d.ledger.energy;
            case = Some(d.case);
        }
        let mean = ones as f64 / samples as f64;
        let energy = energy / samples as f64;
        let div = kl_bernoulli(p, q);
        let ratio = energy / (div + slack);
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        doc.rows.push(row([
            ("p", json!(p)),
            ("q", json!(q)),
            ("case", json!(case.map(|c| c.label()))),
            ("mean", json!(mean)),
            ("energy", json!(energy)),
            ("divergence_bits", json!(div)),
            ("ratio", json!(ratio)),
        ]));
        doc.metric(&format!("p{p}_q{q}_ratio"), ratio);
        doc.test(TestVerdict::new(
            format!("({p}, {q}) sampled mean"),
            (mean - p).abs() <= 3.0 * sigma,
            format!("{mean:.5} within {:.5} of {p}", 3.0 * sigma),
        ));
        doc.test(TestVerdict::new(
            format!("({p}, {q}) energy ratio"),
            ratio <= 200.0,
            format!("energy {energy:.4} / (D {div:.4} + {slack}) = {ratio:.2}, limit 200"),
        ));
    }
    Ok(doc)
}

pub fn icost(spec_path: &Path, mu: &str) -> Result<ReportDocument> {
    let spec = load_spec(spec_path)?;
    let mu = parse_mu(mu, spec.alice_inputs(), spec.bob_inputs())?;
    let ic = external_info_cost(&spec, &mu)?;
    let mut doc = ReportDocument::new("icost");
    doc.param("spec", spec_path.display().to_string())
        .param("mu", json!(mu.probs));
    doc.metric("ic_ext_bits", ic.direct)
        .metric("chain_bits", ic.chain)
        .metric("divergence_bits", ic.divergence);
    for (i, v) in ic.per_round.iter().enumerate() {
        doc.metric(&format!("round{i}_bits"), *v);
    }
    doc.test(TestVerdict::new(
        "three computations agree",
        ic.spread() <= 1e-9,
        format!("spread {:.2e}", ic.spread()),
    ));
    Ok(doc)
}

pub fn equiv(
    c: &Common,
    spec_path: Option<&Path>,
    mu: &str,
    grid_n: u64,
    samples: u64,
) -> Result<ReportDocument> {
    let pi = match spec_path {
        Some(p) => load_spec(p)?,
        None => {
            let mut rng = RandomSource::new(c.seed).public;
            random_table_protocol(2, 2, 2, true, &mut rng)
        }
    };
    let mu = parse_mu(mu, pi.alice_inputs(), pi.bob_inputs())?;
    let mut doc = ReportDocument::new("equiv");
    doc.param("spec", json!(spec_path.map(|p| p.display().to_string())))
        .param("mu", json!(mu.probs))
        .param("grid_n", grid_n)
        .param("samples", samples);
    doc.seeds = vec![c.seed];

    let phi = noiseless_from_noisy(&pi);
    let ic_phi = external_info_cost(&phi, &mu)?.direct;
    let ec = distributional_energy_cost(&pi, &mu)?;
    doc.metric("ic_ext_noiseless_bits", ic_phi)
        .metric("energy_cost", ec);
    doc.test(TestVerdict::new(
        "information cost of the noiseless simulation at most EC / ln 2",
        ic_phi <= ec / LN_2 + 1e-9,
        format!("{ic_phi:.6} <= {:.6}", ec / LN_2),
    ));

    if samples == 0 {
        return Ok(doc);
    }
    let joint = FiniteJoint::from_protocol(&phi, &mu)?;
    let chunk = 1_000u64;
    let parts: Vec<Result<(Vec<u64>, f64)>> = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|b| {
            let mut sim = NoisySimulator::new(&phi, &mu, grid_n)?;
            let mut counts = vec![0u64; joint.probs.len()];
            let mut energy = 0.0;
            for i in b * chunk..((b + 1) * chunk).min(samples) {
                let mut rng = RandomSource::for_trial(c.seed, i);
                let (x, y) = sample_inputs(&mu, &mut rng);
                let run = sim.run(x, y, &mut rng)?;
                counts[(x * mu.ny + y) * joint.leaves() + run.transcript.to_index() as usize] += 1;
                energy += run.ledger.energy;
            }
            Ok((counts, energy))
        })
        .collect();
    let mut counts = vec![0u64; joint.probs.len()];
    let mut energy = 0.0;
    for part in parts {
        let (cs, e) = part?;
        counts.iter_mut().zip(cs).for_each(|(a, b)| *a += b);
        energy += e;
    }
    let energy = energy / samples as f64;
    let ratio = energy / (ic_phi + 1.0 / (2 * grid_n) as f64);
    let gof = chi_square_gof(&counts, &joint.probs, SIGNIFICANCE);
    doc.metric("simulated_energy", energy)
        .metric("energy_ratio", ratio);
    doc.test(TestVerdict::from_gof("simulated transcript law", &gof));
    doc.test(TestVerdict::new(
        "energy within 1e4 of IC + 1/(2n)",
        ratio <= 1e4,
        format!("ratio {ratio:.3}"),
    ));
    Ok(doc)
}

pub fn suite(c: &Common, scale: f64, only: &[u8]) -> Result<ReportDocument> {
    if !(scale > 0.0 && scale <= 1.0) {
        bail!("--scale must be in (0, 1]");
    }
    let ids: Vec<u8> = if only.is_empty() {
        CRITERIA.to_vec()
    } else {
        only.to_vec()
    };
    let cfg = SuiteConfig {
        seed: c.seed,
        scale,
    };
    let mut doc = ReportDocument::new("suite");
    doc.param("scale", scale).param("criteria", json!(ids));
    doc.seeds = vec![c.seed];
    for r in run_suite(&cfg, &ids) {
        doc.test(TestVerdict::from(&r));
        for (k, v) in &r.metrics {
            doc.metric(&format!("{:02}.{k}", r.id), *v);
        }
        for mut extra in r.rows.clone() {
            extra.insert("criterion".into(), json!(r.id));
            doc.rows.push(extra);
        }
    }
    Ok(doc)
}

pub fn print_summary(doc: &ReportDocument) {
    println!("{} ({:.2} s)", doc.name, doc.wall_clock_seconds);
    for t in &doc.tests {
        println!(
            "  {} {}: {}",
            if t.passed { "PASS" } else { "FAIL" },
            t.name,
            t.detail
        );
    }
    if doc.metrics.len() <= 40 {
        for (k, v) in &doc.metrics {
            println!("  {k} = {v}");
        }
    } else {
        println!("  {} metrics", doc.metrics.len());
    }
    if !doc.rows.is_empty() {
        println!("  {} rows", doc.rows.len());
    }
}
