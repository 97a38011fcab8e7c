use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CostLedger, NodeRule, Party, ProtocolSpec, RandomSource, Transcript, Walker};
use crate::error::{Error, Result};

/// Energy of one bit sent over a channel with crossover `crossover`.
#[inline]
pub fn bit_energy(crossover: f64) -> f64 {
    let d = crossover - 0.5;
    4.0 * d * d
}

/// Noise level of a binary symmetric channel, stored as its advantage
/// `epsilon`; the crossover is `1/2 - epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    epsilon: f64,
}

impl Noise {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::Parameter(format!(
                "advantage {epsilon} gives a crossover outside [0, 1/2]"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn from_crossover(crossover: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&crossover) {
            return Err(Error::Parameter(format!(
                "crossover {crossover} outside [0, 1/2]"
            )));
        }
        Ok(Self {
            epsilon: 0.5 - crossover,
        })
    }

    pub fn noiseless() -> Self {
        Self { epsilon: 0.5 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn crossover(&self) -> f64 {
        0.5 - self.epsilon
    }
}

/// Number of corrupted rounds on each side of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub m_x: usize,
    pub m_y: usize,
}

impl ErrorCounts {
    pub fn m(&self) -> usize {
        self.m_x + self.m_y
    }

    pub fn add(&mut self, party: Party) {
        match party {
            Party::Alice => self.m_x += 1,
            Party::Bob => self.m_y += 1,
        }
    }
}

/// Outcome of one execution over a noisy channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub transcript: Transcript,
    pub errors: ErrorCounts,
    pub ledger: CostLedger,
    /// Positions whose received bit differs from the intended one.
    pub flips: Vec<bool>,
}

fn draw_intended(rule: &NodeRule, rng: &mut impl Rng) -> u8 {
    match rule.intended() {
        Some(b) => b,
        None => u8::from(rng.random::<f64>() < rule.p_one),
    }
}

fn execute(
    spec: &ProtocolSpec,
    x: usize,
    y: usize,
    rng: &mut RandomSource,
    crossover_of: impl Fn(&NodeRule) -> f64,
) -> Result<Execution> {
    spec.validate()?;
    // Each party keeps its own view; feedback keeps them identical.
    let mut alice: Walker<'_> = spec.walker();
    let mut bob: Walker<'_> = spec.walker();
    let mut errors = ErrorCounts::default();
    let mut ledger = CostLedger::new();
    let mut flips = Vec::with_capacity(spec.rounds());
    for round in 0..spec.rounds() {
        let speaker = spec.speaker(round);
        let rule = match speaker {
            Party::Alice => alice.rule(x)?,
            Party::Bob => bob.rule(y)?,
        };
        let intended = draw_intended(&rule, rng.private(speaker));
        let crossover = crossover_of(&rule);
        if !(0.0..=0.5).contains(&crossover) {
            return Err(Error::Parameter(format!(
                "crossover {crossover} outside [0, 1/2]"
            )));
        }
        let flipped = crossover > 0.0 && rng.channel.random::<f64>() < crossover;
        let received = intended ^ u8::from(flipped);
        if flipped {
            errors.add(speaker);
        }
        flips.push(flipped);
        ledger.charge(crossover);
        alice.push(received);
        bob.push(received);
    }
    debug_assert_eq!(alice.prefix(), bob.prefix());
    Ok(Execution {
        transcript: Transcript::from_bits(alice.prefix().to_vec()),
        errors,
        ledger,
        flips,
    })
}

/// Runs every round of `spec` over a fixed-crossover channel with feedback.
pub fn run_over_bsc(
    spec: &ProtocolSpec,
    x: usize,
    y: usize,
    noise: Noise,
    rng: &mut RandomSource,
) -> Result<Execution> {
    let crossover = noise.crossover();
    execute(spec, x, y, rng, |_| crossover)
}

/// Runs `spec` with each bit sent over the crossover its node chooses.
pub fn run_variable_noise(
    spec: &ProtocolSpec,
    x: usize,
    y: usize,
    rng: &mut RandomSource,
) -> Result<Execution> {
    execute(spec, x, y, rng, |rule| rule.crossover)
}

/// Replays `party`'s intended bits along a full transcript and counts the
/// rounds in which what was received differs from what it meant to send.
pub fn count_errors(
    spec: &ProtocolSpec,
    party: Party,
    input: usize,
    transcript: &Transcript,
) -> Result<usize> {
    if transcript.len() != spec.rounds() {
        return Err(Error::Shape {
            expected: spec.rounds(),
            got: transcript.len(),
        });
    }
    let mut walker = spec.walker();
    let mut count = 0;
    for &received in transcript.bits() {
        if walker.speaker() == Some(party) {
            let rule = walker.rule(input)?;
            let intended = rule.intended().ok_or_else(|| {
                Error::Unsupported("error counts need a deterministic speaker".into())
            })?;
            count += usize::from(intended != received);
        }
        walker.push(received);
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[test]
    fn bit_energy_values() {
        assert_eq!(bit_energy(0.5), 0.0);
        assert_eq!(bit_energy(0.0), 1.0);
        assert!((bit_energy(0.3) - 0.16).abs() < 1e-15);
    }

    #[test]
    fn noise_ranges() {
        assert!(Noise::new(0.6).is_err());
        assert!(Noise::from_crossover(0.51).is_err());
        assert!(Noise::from_crossover(-0.1).is_err());
        assert_eq!(Noise::new(0.1).unwrap().crossover(), 0.4);
    }

    #[test]
    fn noiseless_single_round() {
        let spec = ProtocolSpec::constant(1, 1);
        for seed in 0..20 {
            let run = run_over_bsc(
                &spec,
                0,
                0,
                Noise::noiseless(),
                &mut RandomSource::new(seed),
            )
            .unwrap();
            assert_eq!(run.transcript.to_string(), "1");
            assert_eq!(run.errors.m(), 0);
            assert_eq!(run.ledger.bits_sent, 1);
            assert_eq!(run.ledger.energy, 1.0);
        }
    }

    #[test]
    fn half_crossover_is_uniform() {
        let spec = ProtocolSpec::constant(1, 1);
        let noise = Noise::from_crossover(0.5).unwrap();
        let n = 20_000;
        let ones: usize = (0..n)
            .map(|s| {
                let run = run_over_bsc(&spec, 0, 0, noise, &mut RandomSource::new(s)).unwrap();
                assert_eq!(run.ledger.energy, 0.0);
                run.transcript.bits()[0] as usize
            })
            .sum();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones as f64 - n as f64 / 2.0).abs() < 4.0 * sigma);
    }

    #[test]
    fn two_round_law_at_crossover_point_four() {
        let spec = ProtocolSpec::constant(2, 1);
        let noise = Noise::from_crossover(0.4).unwrap();
        let n = 40_000u64;
        let mut counts: HashMap<String, u64> = HashMap::new();
        for s in 0..n {
            let run = run_over_bsc(&spec, 0, 0, noise, &mut RandomSource::new(s)).unwrap();
            *counts.entry(run.transcript.to_string()).or_default() += 1;
        }
        let freq = counts["11"] as f64 / n as f64;
        let sigma = (0.36f64 * 0.64 / n as f64).sqrt();
        assert!((freq - 0.36).abs() < 4.0 * sigma, "freq {freq}");
    }

    #[test]
    fn count_errors_replays_intent() {
        let spec = ProtocolSpec::constant(2, 1);
        let t: Transcript = "01".parse().unwrap();
        assert_eq!(count_errors(&spec, Party::Alice, 0, &t).unwrap(), 1);
        assert_eq!(count_errors(&spec, Party::Bob, 0, &t).unwrap(), 0);
        let clean: Transcript = "11".parse().unwrap();
        assert_eq!(count_errors(&spec, Party::Alice, 0, &clean).unwrap(), 0);
        assert!(matches!(
            count_errors(&spec, Party::Alice, 0, &"1".parse().unwrap()),
            Err(Error::Shape {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn counted_errors_match_realized_flips() {
        let spec = ProtocolSpec::seeded(12, 3, 2, 5);
        let noise = Noise::new(0.15).unwrap();
        for seed in 0..200 {
            let run = run_over_bsc(&spec, 2, 1, noise, &mut RandomSource::new(seed)).unwrap();
            let mx = count_errors(&spec, Party::Alice, 2, &run.transcript).unwrap();
            let my = count_errors(&spec, Party::Bob, 1, &run.transcript).unwrap();
            assert_eq!(ErrorCounts { m_x: mx, m_y: my }, run.errors);
            assert_eq!(mx + my, run.flips.iter().filter(|&&f| f).count());
        }
    }

    #[test]
    fn variable_noise_uses_node_crossovers() {
        let spec = ProtocolSpec::xor(3, 2, 2).with_crossover(0.2);
        let run = run_variable_noise(&spec, 1, 0, &mut RandomSource::new(1)).unwrap();
        assert!((run.ledger.energy - 3.0 * bit_energy(0.2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_domain_input() {
        let spec = ProtocolSpec::xor(2, 2, 2);
        assert!(run_over_bsc(&spec, 2, 0, Noise::noiseless(), &mut RandomSource::new(0)).is_err());
    }
}
