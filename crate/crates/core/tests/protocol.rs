use proptest::prelude::*;
use rand::Rng;

use scot::bits::BitString;
use scot::protocol::{
    decode_rc, detection_independence_test, detection_tallies, error_accept, run_honest, DetectionTallies,
    ProtocolError, ProtocolParams, Variant,
};
use scot::seed::SeedTree;
use scot::spacetime::{in_region, standard_geometry, Agent};
use scot::stats::Proportion;

fn params(n: usize, seed: u64) -> ProtocolParams {
    ProtocolParams::new(n, standard_geometry(1.0, 0.1).unwrap(), seed).unwrap()
}

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

#[test]
fn single_pair_masking_cancels() {
    for seed in 0..50 {
        let t = run_honest(&params(1, seed), false, &bits("1"), &bits("0")).unwrap();
        assert_eq!(t.output.unwrap().bits, bits("1"));
    }
}

#[test]
fn decode_examples() {
    let (s, d0, d1) = (bits("01"), bits("10"), bits("01"));
    assert_eq!(decode_rc(&s, &d0, &d1, false).unwrap(), bits("11"));
    assert_eq!(decode_rc(&s, &d0, &d1, true).unwrap(), bits("00"));
    assert!(decode_rc(&s, &bits("1"), &d1, false).is_err());
}

#[test]
fn decoded_records_equal_r_c() {
    for seed in 0..1000 {
        let x = BitString::zeros(16);
        let t = run_honest(&params(16, seed), seed % 2 == 1, &x, &x).unwrap();
        let expected = if t.c { &t.r1 } else { &t.r0 };
        assert_eq!(&decode_rc(&t.s, &t.d0, &t.d1, t.c).unwrap(), expected, "seed {seed}");
    }
}

#[test]
fn honest_invariants() {
    let mut rng = SeedTree::new(4).stream("inputs", 0);
    for seed in 0..200 {
        let x0 = BitString::random(8, &mut rng);
        let x1 = BitString::random(8, &mut rng);
        let b = rng.random::<bool>();
        let p = params(8, seed);
        let t = run_honest(&p, b, &x0, &x1).unwrap();
        assert_eq!(t.b_prime, Some(t.c ^ t.b));
        let b_prime = t.c ^ t.b;
        let masks = [&t.r0, &t.r1];
        assert_eq!(t.t0, masks[b_prime as usize].xor(&x0).unwrap());
        assert_eq!(t.t1, masks[!b_prime as usize].xor(&x1).unwrap());
        let out = t.output.as_ref().unwrap();
        assert_eq!(out.agent, Agent::bob_outpost(b as usize));
        assert!(in_region(&out.at, p.geometry.region(b as usize)));
        assert_eq!(&out.bits, if b { &x1 } else { &x0 });
        assert!(t.validate_causality().is_ok());
        assert!(!t.has_quantum_message_between_bobs());
    }
}

#[test]
fn surviving_pairs_mean() {
    let n = 64;
    let x = BitString::zeros(n);
    let counts: Vec<f64> = (0..1000)
        .map(|seed| {
            let p = params(n, seed).with_loss_prob(0.5).unwrap();
            run_honest(&p, false, &x, &x).unwrap().surviving.len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    // |S| ~ Binomial(64, 1/4).
    let sigma = (n as f64 * 0.25 * 0.75 / counts.len() as f64).sqrt();
    assert!((mean - 16.0).abs() <= 3.0 * sigma, "mean {mean}");
}

#[test]
fn lossy_output_is_restricted_input() {
    let x0 = bits("1011001110001101");
    let x1 = bits("0110110001110010");
    for seed in 0..100 {
        let p = params(16, seed).with_loss_prob(0.4).unwrap();
        match run_honest(&p, true, &x0, &x1) {
            Ok(t) => assert_eq!(t.output.unwrap().bits, x1.restrict(&t.surviving).unwrap()),
            Err(ProtocolError::Aborted) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn total_loss_aborts() {
    let x = BitString::zeros(2);
    let p = params(2, 3).with_loss_prob(0.999).unwrap();
    assert!(matches!(run_honest(&p, false, &x, &x), Err(ProtocolError::Aborted)));
    assert!(params(2, 3).with_loss_prob(1.0).is_err());
}

#[test]
fn variants() {
    let x0 = bits("0000");
    let x1 = bits("1111");
    let own = Variant { outposts_assume_own_index: true, ..Variant::default() };
    let t = run_honest(&params(4, 8).with_variant(own), false, &x0, &x1).unwrap();
    assert_eq!(t.output.as_ref().unwrap().bits, x0);
    let spurious = t.spurious_output.as_ref().unwrap();
    assert_eq!(spurious.agent, Agent::Bob1);
    assert!(!t.messages.iter().any(|m| m.step == "5"));

    let pre = Variant { alice_pregenerates_inputs: true, ..Variant::default() };
    let t = run_honest(&params(4, 8).with_variant(pre), true, &x0, &x1).unwrap();
    assert_eq!(t.output.unwrap().bits, x1);
    assert!(t.messages.iter().any(|m| m.step == "1" && m.receiver == Agent::Alice1));
}

#[test]
fn error_acceptance_examples() {
    let x = BitString::from_iter((0..100).map(|i| i % 7 == 0));
    let mut y = x.clone();
    assert!(error_accept(&y, &x, 0.0));
    y.flip(3).unwrap();
    assert!(error_accept(&y, &x, 0.015));
    y.flip(4).unwrap();
    assert!(!error_accept(&y, &x, 0.015));
    assert!(!error_accept(&bits("1"), &bits("0"), 0.0));
}

fn simulated_tallies(rates: [f64; 2], samples: u64, seed: u64) -> DetectionTallies {
    let mut rng = SeedTree::new(seed).stream("tallies", 0);
    let mut arm = |p: f64| Proportion::new((0..samples).filter(|_| rng.random::<f64>() < p).count() as u64, samples);
    let c0 = arm(rates[0]);
    DetectionTallies::new(c0, arm(rates[1]))
}

#[test]
fn detection_test_calibration() {
    let seeds = 400;
    let passes = (0..seeds)
        .filter(|&s| detection_independence_test(&simulated_tallies([0.5, 0.5], 10_000, s)).unwrap().pass)
        .count() as f64;
    // Nominal pass rate 0.99; allow three binomial standard errors.
    let slack = 3.0 * (0.99 * 0.01 / seeds as f64).sqrt();
    assert!(passes / seeds as f64 >= 0.99 - slack, "{passes}");
}

#[test]
fn detection_test_power() {
    let fails = (0..100)
        .filter(|&s| !detection_independence_test(&simulated_tallies([0.5, 0.4], 10_000, s)).unwrap().pass)
        .count();
    assert!(fails >= 99);
}

#[test]
fn detection_test_edges() {
    let same = DetectionTallies::new(Proportion::new(40, 100), Proportion::new(40, 100));
    let t = detection_independence_test(&same).unwrap();
    assert!(t.pass && (t.p_value - 1.0).abs() < 1e-12);
    let small = DetectionTallies::new(Proportion::new(4, 10), Proportion::new(40, 100));
    assert!(matches!(
        detection_independence_test(&small),
        Err(ProtocolError::InsufficientSamples { .. })
    ));
}

#[test]
fn honest_losses_pass_independence() {
    let x = BitString::zeros(32);
    let runs: Vec<_> = (0..600)
        .filter_map(|seed| run_honest(&params(32, seed).with_loss_prob(0.3).unwrap(), false, &x, &x).ok())
        .collect();
    assert!(detection_independence_test(&detection_tallies(&runs)).unwrap().pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_output_is_x_b(n in 1usize..24, seed in any::<u64>(), b in any::<bool>(), v0 in any::<u32>(), v1 in any::<u32>()) {
        let x0 = BitString::from_iter((0..n).map(|i| v0 >> i & 1 == 1));
        let x1 = BitString::from_iter((0..n).map(|i| v1 >> i & 1 == 1));
        let t = run_honest(&params(n, seed), b, &x0, &x1).unwrap();
        prop_assert_eq!(&t.output.unwrap().bits, if b { &x1 } else { &x0 });
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), b in any::<bool>()) {
        let x = BitString::zeros(6);
        let a = run_honest(&params(6, seed), b, &x, &x).unwrap();
        let c = run_honest(&params(6, seed), b, &x, &x).unwrap();
        prop_assert_eq!(a, c);
    }
}
