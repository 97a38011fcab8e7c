use std::hint::black_box;

use bsclab::compressor::{
    ChunkContext, ChunkParams, Compressor, CompressorConfig, ProductCountDistribution,
    ThresholdPlan,
};
use bsclab::energy::{brw_to_top, sample_with_prior};
use bsclab::infotheory::{external_info_cost, InputDist};
use bsclab::protocol::{CostLedger, ProtocolSpec, RandomSource};
use bsclab::verify::{exact_chunk_distribution, random_table_protocol};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn threshold(c: &mut Criterion) {
    let mut group = c.benchmark_group("threshold");
    for half in [10usize, 50] {
        let dist = ProductCountDistribution::binomial(half, 0.5);
        let budget = (half / 2) as i64;
        let mut plan = ThresholdPlan::new(budget, dist).unwrap();
        group.bench_with_input(BenchmarkId::new("plan_run", half), &half, |b, &h| {
            let mut k = 0i64;
            b.iter(|| {
                k = (k + 7) % (h as i64 + 1);
                let mut ledger = CostLedger::new();
                black_box(plan.run(k, (k * 3) % (h as i64 + 1), &mut ledger).unwrap())
            })
        });
    }
    group.finish();
}

fn chunk(c: &mut Criterion) {
    let mut group = c.benchmark_group("chunk");
    group.sample_size(20);
    let params = ChunkParams::with_gamma(0.1, 20).with_minimal_t();
    let spec = ProtocolSpec::seeded(20, 2, 2, 1);
    let ctx = ChunkContext::cached(spec.walker(), 1, 0, 20).unwrap();
    let mut compressor = Compressor::new(CompressorConfig::default());
    let mut seed = 0u64;
    group.bench_function("simulate_gamma20_minimal_t", |b| {
        b.iter(|| {
            seed += 1;
            black_box(
                compressor
                    .simulate_chunk(&ctx, &params, &mut RandomSource::new(seed))
                    .unwrap(),
            )
        })
    });
    group.bench_function("exact_law_gamma20", |b| {
        b.iter(|| black_box(exact_chunk_distribution(&params).unwrap()))
    });
    group.finish();
}

fn walks(c: &mut Criterion) {
    let mut group = c.benchmark_group("walk");
    for a in [16u64, 256, 4096] {
        group.bench_with_input(BenchmarkId::new("brw_double", a), &a, |b, &a| {
            let mut rng = ChaCha8Rng::seed_from_u64(a);
            b.iter(|| black_box(brw_to_top(a, a, &mut rng, &mut CostLedger::new()).unwrap()))
        });
    }
    group.bench_function("prior_far_case", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let mut rng = RandomSource::new(seed);
            black_box(
                sample_with_prior(0.05, 0.005, 512, &mut rng, &mut CostLedger::new()).unwrap(),
            )
        })
    });
    group.finish();
}

fn info_cost(c: &mut Criterion) {
    let mut group = c.benchmark_group("info_cost");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for rounds in [4usize, 8] {
        let spec = random_table_protocol(rounds, 3, 3, false, &mut rng);
        let mu = InputDist::random(3, 3, &mut rng);
        group.bench_with_input(BenchmarkId::new("external", rounds), &rounds, |b, _| {
            b.iter(|| black_box(external_info_cost(&spec, &mu).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, threshold, chunk, walks, info_cost);
criterion_main!(benches);
