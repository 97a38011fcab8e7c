use bsclab::compressor::{
    simulate_noiseless, simulate_noiseless_with, ChunkParams, SimulationOptions,
};
use bsclab::protocol::{Party, ProtocolSpec, RandomSource, Transcript};
use bsclab::verify::{bonferroni, chi_square_gof};

/// Positions where the received bit differs from the speaker's intent.
fn error_pattern(spec: &ProtocolSpec, x: usize, y: usize, t: &Transcript) -> Vec<u8> {
    let mut walker = spec.walker();
    let mut out = Vec::with_capacity(t.len());
    for &bit in t.bits() {
        let input = if walker.speaker() == Some(Party::Alice) {
            x
        } else {
            y
        };
        let intended = walker.rule(input).unwrap().intended().unwrap();
        out.push(u8::from(intended != bit));
        walker.push(bit);
    }
    out
}

#[test]
fn flips_are_independent_across_positions() {
    let eps = 0.1;
    let gamma = 8;
    let t = ChunkParams::with_gamma(eps, gamma).with_minimal_t().t;
    let options = SimulationOptions {
        gamma: Some(gamma),
        t: Some(t),
        ..SimulationOptions::default()
    };
    let spec = ProtocolSpec::seeded(16, 3, 3, 21);
    let n = 20_000u64;
    let pairs = [(7usize, 8usize), (0, 15), (3, 4), (2, 10)];
    let mut counts = vec![[0u64; 4]; pairs.len()];
    let mut marginal = [0u64; 16];
    for i in 0..n {
        let mut rng = RandomSource::for_trial(500, i);
        let sim = simulate_noiseless_with(&spec, 2, 1, eps, &options, &mut rng).unwrap();
        assert_eq!(sim.chunks.len(), 2);
        let e = error_pattern(&spec, 2, 1, &sim.transcript);
        for (k, &(a, b)) in pairs.iter().enumerate() {
            counts[k][usize::from(2 * e[a] + e[b])] += 1;
        }
        for (m, v) in marginal.iter_mut().zip(&e) {
            *m += u64::from(*v);
        }
    }
    let c = 0.5 - eps;
    let law = [(1.0 - c) * (1.0 - c), (1.0 - c) * c, c * (1.0 - c), c * c];
    let level = bonferroni(pairs.len() + 1);
    for (k, pair) in pairs.iter().enumerate() {
        let gof = chi_square_gof(&counts[k], &law, level);
        assert!(gof.pass, "positions {pair:?}: p = {}", gof.p_value);
    }
    let rate = marginal.iter().sum::<u64>() as f64 / (16 * n) as f64;
    let sigma = (c * (1.0 - c) / (16 * n) as f64).sqrt();
    assert!((rate - c).abs() < 4.0 * sigma, "overall error rate {rate}");
}

#[test]
fn runs_are_reproducible_from_their_seed() {
    let spec = ProtocolSpec::seeded(30, 2, 2, 3);
    let options = SimulationOptions {
        gamma: Some(10),
        t: Some(ChunkParams::with_gamma(0.1, 10).with_minimal_t().t),
        ..SimulationOptions::default()
    };
    let a = simulate_noiseless_with(&spec, 0, 1, 0.1, &options, &mut RandomSource::new(8)).unwrap();
    let b = simulate_noiseless_with(&spec, 0, 1, 0.1, &options, &mut RandomSource::new(8)).unwrap();
    assert_eq!(a.transcript, b.transcript);
    assert_eq!(a.ledger, b.ledger);
    assert_eq!(a.chunks.len(), 3);
    assert_eq!(a.chunks.iter().map(|c| c.len).sum::<usize>(), 30);
}

#[test]
fn non_alternating_protocols_are_padded_and_stripped() {
    let speakers = vec![
        Party::Alice,
        Party::Alice,
        Party::Bob,
        Party::Bob,
        Party::Bob,
    ];
    let spec = ProtocolSpec::xor(5, 2, 2).with_speakers(speakers);
    let sim = simulate_noiseless(&spec, 1, 0, 0.3, &mut RandomSource::new(1)).unwrap();
    assert!(sim.is_direct());
    assert_eq!(sim.transcript.len(), 5);
    assert!(sim.padded.len() > 5 && sim.padded.len().is_multiple_of(2));
}

#[test]
fn invalid_override_is_reported() {
    let spec = ProtocolSpec::seeded(20, 2, 2, 3);
    let options = SimulationOptions {
        gamma: Some(20),
        t: Some(1.0),
        ..SimulationOptions::default()
    };
    let err = simulate_noiseless_with(&spec, 0, 0, 0.1, &options, &mut RandomSource::new(0));
    assert!(err.is_err());
}
