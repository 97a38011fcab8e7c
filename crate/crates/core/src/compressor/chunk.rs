use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::counts::ProductCountDistribution;
use super::params::{validate_chunk, ChunkParams, DEFAULT_BETA, DEFAULT_ITERATION_CAP};
use super::threshold::ThresholdPlan;
use crate::error::{Error, Result};
use crate::protocol::{CostLedger, ErrorCounts, Party, RandomSource, Walker};

/// Largest chunk depth for which a per-leaf count table may be built.
pub const MAX_CACHED_GAMMA: usize = 24;

/// Which sampler produced a chunk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Low,
    High,
    Direct,
}

/// Knobs shared by every level of a compression run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressorConfig {
    pub beta: f64,
    pub iteration_cap: u64,
}

impl Default for CompressorConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            iteration_cap: DEFAULT_ITERATION_CAP,
        }
    }
}

/// `(m_x, m_y)` for every leaf below a fixed root, indexed by the leaf's
/// bits read most significant first.
#[derive(Clone, Debug)]
pub struct LeafCache {
    gamma: usize,
    counts: Vec<u32>,
}

impl LeafCache {
    pub fn build(root: &Walker<'_>, x: usize, y: usize, gamma: usize) -> Result<Self> {
        if gamma > MAX_CACHED_GAMMA {
            return Err(Error::Guard {
                entries: 1u64 << gamma.min(63),
                limit: 1u64 << MAX_CACHED_GAMMA,
            });
        }
        let mut counts = vec![0u32; 1usize << gamma];
        fill_cache(
            root.clone(),
            x,
            y,
            gamma,
            0,
            0,
            ErrorCounts::default(),
            &mut counts,
        )?;
        Ok(Self { gamma, counts })
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn lookup(&self, leaf: &[u8]) -> ErrorCounts {
        let index = leaf
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        let packed = self.counts[index];
        ErrorCounts {
            m_x: (packed & 0xFFFF) as usize,
            m_y: (packed >> 16) as usize,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_cache(
    walker: Walker<'_>,
    x: usize,
    y: usize,
    gamma: usize,
    depth: usize,
    index: usize,
    errors: ErrorCounts,
    out: &mut [u32],
) -> Result<()> {
    if depth == gamma {
        out[index] = errors.m_x as u32 | ((errors.m_y as u32) << 16);
        return Ok(());
    }
    let (speaker, intended) = intended_bit(&walker, x, y)?;
    for bit in [0u8, 1] {
        let mut child = walker.clone();
        child.push(bit);
        let mut e = errors;
        if bit != intended {
            e.add(speaker);
        }
        fill_cache(
            child,
            x,
            y,
            gamma,
            depth + 1,
            (index << 1) | bit as usize,
            e,
            out,
        )?;
    }
    Ok(())
}

fn intended_bit(walker: &Walker<'_>, x: usize, y: usize) -> Result<(Party, u8)> {
    let speaker = walker
        .speaker()
        .ok_or_else(|| Error::Spec("chunk extends past the end of the protocol".into()))?;
    let input = match speaker {
        Party::Alice => x,
        Party::Bob => y,
    };
    let bit = walker
        .rule(input)?
        .intended()
        .ok_or_else(|| Error::Unsupported("compression needs a deterministic protocol".into()))?;
    Ok((speaker, bit))
}

/// Root of a chunk: the protocol node reached so far and both inputs.
#[derive(Clone, Debug)]
pub struct ChunkContext<'a> {
    pub root: Walker<'a>,
    pub x: usize,
    pub y: usize,
    cache: Option<Arc<LeafCache>>,
}

impl<'a> ChunkContext<'a> {
    pub fn new(root: Walker<'a>, x: usize, y: usize) -> Self {
        Self {
            root,
            x,
            y,
            cache: None,
        }
    }

    /// Context with a precomputed leaf table of depth `gamma`.
    pub fn cached(root: Walker<'a>, x: usize, y: usize, gamma: usize) -> Result<Self> {
        let cache = Arc::new(LeafCache::build(&root, x, y, gamma)?);
        Ok(Self {
            root,
            x,
            y,
            cache: Some(cache),
        })
    }

    /// Each party's error count along `leaf`. Alice's depends only on `x`
    /// and the public leaf, Bob's only on `y`.
    pub fn counts(&self, leaf: &[u8]) -> Result<ErrorCounts> {
        if let Some(cache) = &self.cache {
            if cache.gamma() == leaf.len() {
                return Ok(cache.lookup(leaf));
            }
        }
        let mut walker = self.root.clone();
        let mut errors = ErrorCounts::default();
        for &bit in leaf {
            let (speaker, intended) = intended_bit(&walker, self.x, self.y)?;
            if bit != intended {
                errors.add(speaker);
            }
            walker.push(bit);
        }
        Ok(errors)
    }
}

/// One sampled chunk with its cost breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct ChunkOutcome {
    pub leaf: Vec<u8>,
    pub errors: ErrorCounts,
    pub branch: Branch,
    /// Rejection rounds of the chosen branch.
    pub rounds: u64,
    pub threshold_calls: u64,
    pub threshold_rounds: u64,
    pub ledger: CostLedger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct LevelKey {
    gamma: usize,
    epsilon: u64,
    theta: u64,
    t: u64,
    beta: u64,
}

impl LevelKey {
    fn of(p: &ChunkParams) -> Self {
        Self {
            gamma: p.gamma,
            epsilon: p.epsilon.to_bits(),
            theta: p.theta.to_bits(),
            t: p.t.to_bits(),
            beta: p.beta.to_bits(),
        }
    }
}

/// Precomputed tables for one parameter tuple.
#[derive(Clone, Debug)]
struct Level {
    p: f64,
    low_plan: Option<ThresholdPlan>,
    high_plan: Option<ThresholdPlan>,
    ln_rho: f64,
    ln_lo: f64,
    ln_hi: f64,
    ln_r: f64,
    ln_t: f64,
    half: f64,
    budget: f64,
}

impl Level {
    fn new(params: &ChunkParams) -> Result<Self> {
        validate_chunk(params).into_result()?;
        let e = params.epsilon;
        let half = params.half();
        let budget = params.budget();
        let p = params.low_mass();
        let low_plan = if p > 0.0 {
            Some(ThresholdPlan::new(
                budget,
                ProductCountDistribution::binomial(half, 0.5 - 2.0 * e),
            )?)
        } else {
            None
        };
        let high_plan = if p < 1.0 {
            Some(ThresholdPlan::new(
                budget,
                ProductCountDistribution::binomial(half, 0.5),
            )?)
        } else {
            None
        };
        Ok(Self {
            p,
            low_plan,
            high_plan,
            ln_rho: ((0.5 + e) * (0.5 - 2.0 * e) / ((0.5 - e) * (0.5 + 2.0 * e))).ln(),
            ln_lo: (0.5 - e).ln(),
            ln_hi: (0.5 + e).ln(),
            ln_r: ((0.5 - e) / (0.5 + e)).ln(),
            ln_t: params.t.ln(),
            half: half as f64,
            budget: budget as f64,
        })
    }

    /// Low-branch acceptance for a party with count `m` and witness `w`.
    fn low_accept(&self, m: usize, witness: i64) -> Result<f64> {
        let gap = witness - m as i64;
        if gap < 0 {
            return Err(Error::Invariant(format!(
                "low-branch acceptance above 1: count {m} exceeds witness {witness}"
            )));
        }
        Ok(if gap == 0 {
            1.0
        } else {
            (gap as f64 * self.ln_rho).exp()
        })
    }

    /// High-branch acceptance for a party with count `m` and witness `w`.
    fn high_accept(&self, m: usize, witness: i64) -> Result<f64> {
        let m = m as f64;
        let ln = m * self.ln_lo + (self.half - m) * self.ln_hi
            - self.ln_t
            - (witness as f64 - self.budget / 2.0) * self.ln_r
            + self.half * std::f64::consts::LN_2;
        let acc = ln.exp();
        if acc > 1.0 + 1e-12 {
            return Err(Error::Invariant(format!(
                "high-branch acceptance {acc} above 1 (count {m}, witness {witness})"
            )));
        }
        Ok(acc.min(1.0))
    }
}

/// Chunked rejection sampler with per-parameter caches.
///
/// One instance may be reused across chunks and trials; it holds no
/// randomness, only tables derived from the parameters.
#[derive(Clone, Debug, Default)]
pub struct Compressor {
    config: CompressorConfig,
    levels: HashMap<LevelKey, Level>,
}

struct Tally {
    rounds: u64,
    threshold_calls: u64,
    threshold_rounds: u64,
}

impl Compressor {
    pub fn new(config: CompressorConfig) -> Self {
        Self {
            config,
            levels: HashMap::new(),
        }
    }

    pub fn config(&self) -> &CompressorConfig {
        &self.config
    }

    fn level(&mut self, params: &ChunkParams) -> Result<(LevelKey, &mut Level)> {
        let key = LevelKey::of(params);
        let level = match self.levels.entry(key) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(v) => v.insert(Level::new(params)?),
        };
        Ok((key, level))
    }

    /// Samples a depth-`gamma` leaf below `ctx.root` with the law of the
    /// noisy channel at `params.epsilon`.
    pub fn simulate_chunk(
        &mut self,
        ctx: &ChunkContext<'_>,
        params: &ChunkParams,
        rng: &mut RandomSource,
    ) -> Result<ChunkOutcome> {
        let (_, level) = self.level(params)?;
        let p = level.p;
        let branch = if rng.public.random::<f64>() < p {
            Branch::Low
        } else {
            Branch::High
        };
        self.sample_branch(ctx, params, branch, rng)
    }

    /// Runs one branch unconditionally; its output law is the chunk law
    /// restricted to `m <= floor(theta)` (low) or `m > floor(theta)` (high).
    pub fn sample_branch(
        &mut self,
        ctx: &ChunkContext<'_>,
        params: &ChunkParams,
        branch: Branch,
        rng: &mut RandomSource,
    ) -> Result<ChunkOutcome> {
        let mut ledger = CostLedger::new();
        let mut tally = Tally {
            rounds: 0,
            threshold_calls: 0,
            threshold_rounds: 0,
        };
        let (leaf, errors) = match branch {
            Branch::Low => self.branch_low(ctx, params, rng, &mut ledger, &mut tally)?,
            Branch::High => self.branch_high(ctx, params, rng, &mut ledger, &mut tally)?,
            Branch::Direct => {
                tally.rounds = 1;
                direct(
                    &ctx.root,
                    ctx.x,
                    ctx.y,
                    params.gamma,
                    params.epsilon,
                    rng,
                    &mut ledger,
                )?
            }
        };
        Ok(ChunkOutcome {
            leaf,
            errors,
            branch,
            rounds: tally.rounds,
            threshold_calls: tally.threshold_calls,
            threshold_rounds: tally.threshold_rounds,
            ledger,
        })
    }

    fn check_cap(&self, rounds: u64, context: &str) -> Result<()> {
        if rounds > self.config.iteration_cap {
            return Err(Error::IterationCap {
                context: context.into(),
                cap: self.config.iteration_cap,
            });
        }
        Ok(())
    }

    fn branch_low(
        &mut self,
        ctx: &ChunkContext<'_>,
        params: &ChunkParams,
        rng: &mut RandomSource,
        ledger: &mut CostLedger,
        tally: &mut Tally,
    ) -> Result<(Vec<u8>, ErrorCounts)> {
        let (key, level) = self.level(params)?;
        if level.low_plan.is_none() {
            return Err(Error::Invariant(
                "low branch drawn with zero low-error mass".into(),
            ));
        }
        let nested = 2.0 * params.epsilon;
        loop {
            tally.rounds += 1;
            self.check_cap(tally.rounds, "low-error branch")?;
            let (leaf, errors) =
                self.simulate_subtree(&ctx.root, ctx.x, ctx.y, params.gamma, nested, rng, ledger)?;
            let level = self.levels.get_mut(&key).expect("level cached");
            let plan = level.low_plan.as_mut().expect("checked above");
            let verdict = plan.run(errors.m_x as i64, errors.m_y as i64, ledger)?;
            tally.threshold_calls += 1;
            tally.threshold_rounds += u64::from(verdict.rounds);
            if verdict.answer {
                continue;
            }
            let acc_x = level.low_accept(errors.m_x, verdict.theta_x)?;
            let acc_y = level.low_accept(errors.m_y, verdict.theta_y)?;
            let ok_x = rng.alice.random::<f64>() < acc_x;
            let ok_y = rng.bob.random::<f64>() < acc_y;
            ledger.charge_noiseless(2);
            if ok_x && ok_y {
                return Ok((leaf, errors));
            }
        }
    }

    fn branch_high(
        &mut self,
        ctx: &ChunkContext<'_>,
        params: &ChunkParams,
        rng: &mut RandomSource,
        ledger: &mut CostLedger,
        tally: &mut Tally,
    ) -> Result<(Vec<u8>, ErrorCounts)> {
        let cap = self.config.iteration_cap;
        let (_, level) = self.level(params)?;
        if level.high_plan.is_none() {
            return Err(Error::Invariant(
                "high branch drawn with zero high-error mass".into(),
            ));
        }
        let mut leaf = vec![0u8; params.gamma];
        loop {
            tally.rounds += 1;
            if tally.rounds > cap {
                return Err(Error::IterationCap {
                    context: "high-error branch".into(),
                    cap,
                });
            }
            fill_uniform(&mut leaf, &mut rng.public);
            let errors = ctx.counts(&leaf)?;
            let plan = level.high_plan.as_mut().expect("checked above");
            let verdict = plan.run(errors.m_x as i64, errors.m_y as i64, ledger)?;
            tally.threshold_calls += 1;
            tally.threshold_rounds += u64::from(verdict.rounds);
            if !verdict.answer {
                continue;
            }
            let acc_x = level.high_accept(errors.m_x, verdict.theta_x)?;
            let acc_y = level.high_accept(errors.m_y, verdict.theta_y)?;
            let ok_x = rng.alice.random::<f64>() < acc_x;
            let ok_y = rng.bob.random::<f64>() < acc_y;
            ledger.charge_noiseless(2);
            if ok_x && ok_y {
                return Ok((leaf, errors));
            }
        }
    }

    /// Samples `depth` rounds below `root` with the channel law at
    /// `epsilon`: directly once `epsilon >= beta`, otherwise chunk by chunk
    /// with default parameters for that noise level.
    #[allow(clippy::too_many_arguments)]
    pub fn simulate_subtree(
        &mut self,
        root: &Walker<'_>,
        x: usize,
        y: usize,
        depth: usize,
        epsilon: f64,
        rng: &mut RandomSource,
        ledger: &mut CostLedger,
    ) -> Result<(Vec<u8>, ErrorCounts)> {
        if epsilon >= self.config.beta {
            return direct(root, x, y, depth, epsilon, rng, ledger);
        }
        let gamma = ChunkParams::default_gamma(epsilon);
        let mut walker = root.clone();
        let mut bits = Vec::with_capacity(depth);
        let mut errors = ErrorCounts::default();
        while bits.len() < depth {
            let len = gamma.min(depth - bits.len());
            let params = ChunkParams::with_gamma(epsilon, len).with_beta(self.config.beta);
            let ctx = ChunkContext::new(walker.clone(), x, y);
            let out = self.simulate_chunk(&ctx, &params, rng)?;
            ledger.merge(&out.ledger);
            errors.m_x += out.errors.m_x;
            errors.m_y += out.errors.m_y;
            for &b in &out.leaf {
                walker.push(b);
            }
            bits.extend_from_slice(&out.leaf);
        }
        Ok((bits, errors))
    }
}

fn fill_uniform(leaf: &mut [u8], rng: &mut impl RngCore) {
    for block in leaf.chunks_mut(64) {
        let word = rng.next_u64();
        for (i, b) in block.iter_mut().enumerate() {
            *b = ((word >> i) & 1) as u8;
        }
    }
}

/// Direct simulation: each round the speaker sends its true bit noiselessly
/// and both parties flip it with a shared coin of bias `1/2 - epsilon`.
pub fn direct(
    root: &Walker<'_>,
    x: usize,
    y: usize,
    depth: usize,
    epsilon: f64,
    rng: &mut RandomSource,
    ledger: &mut CostLedger,
) -> Result<(Vec<u8>, ErrorCounts)> {
    let crossover = 0.5 - epsilon;
    let mut walker = root.clone();
    let mut bits = Vec::with_capacity(depth);
    let mut errors = ErrorCounts::default();
    for _ in 0..depth {
        let (speaker, intended) = intended_bit(&walker, x, y)?;
        ledger.charge_noiseless(1);
        let flip = crossover > 0.0 && rng.public.random::<f64>() < crossover;
        if flip {
            errors.add(speaker);
        }
        let received = intended ^ u8::from(flip);
        walker.push(received);
        bits.push(received);
    }
    Ok((bits, errors))
}
