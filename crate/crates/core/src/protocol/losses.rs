//! Qubit losses and the check that detection does not depend on Bob's basis.

use rand::Rng;

use super::{ChoiceSource, ProtocolError, RngSource, Transcript};
use crate::qstate::QStateError;
use crate::stats::{two_proportion_test, Proportion};

const MIN_SAMPLES: u64 = 100;
const SIGNIFICANCE: f64 = 0.01;

/// Pairs whose two qubits were both detected, each qubit surviving
/// independently with probability `1 - loss_prob`.
pub(crate) fn sample_survivors(
    n: usize,
    loss_prob: f64,
    src: &mut dyn ChoiceSource,
) -> Result<Vec<usize>, QStateError> {
    let weights = [1.0 - loss_prob, loss_prob];
    let mut surviving = Vec::new();
    for j in 0..n {
        let first = src.choose(&weights)? == 0;
        let second = src.choose(&weights)? == 0;
        if first && second {
            surviving.push(j);
        }
    }
    Ok(surviving)
}

/// Zero-based labels of the pairs that survive transmission.
pub fn apply_losses<R: Rng + ?Sized>(n: usize, loss_prob: f64, rng: &mut R) -> Vec<usize> {
    sample_survivors(n, loss_prob, &mut RngSource(rng))
        .expect("loss weights are a probability distribution")
}

/// Pair detections split by Bob's basis choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionTallies {
    pub by_basis: [Proportion; 2],
}

impl DetectionTallies {
    pub fn new(c0: Proportion, c1: Proportion) -> Self {
        DetectionTallies { by_basis: [c0, c1] }
    }
}

/// Counts detected pairs (successes) out of transmitted pairs (trials) for
/// each value of `c`.
pub fn detection_tallies<'a>(transcripts: impl IntoIterator<Item = &'a Transcript>) -> DetectionTallies {
    let mut by_basis = [Proportion::new(0, 0); 2];
    for t in transcripts {
        let arm = &mut by_basis[t.c as usize];
        arm.successes += t.surviving.len() as u64;
        arm.trials += t.n as u64;
    }
    DetectionTallies { by_basis }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceTest {
    pub z: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Two-proportion z-test of equal detection rates for `c = 0` and `c = 1`;
/// passes iff the p-value is at least 0.01.
pub fn detection_independence_test(tallies: &DetectionTallies) -> Result<IndependenceTest, ProtocolError> {
    let [a, b] = tallies.by_basis;
    let available = a.trials.min(b.trials);
    if available < MIN_SAMPLES {
        return Err(ProtocolError::InsufficientSamples {
            required: MIN_SAMPLES,
            available,
        });
    }
    let (z, p_value) = two_proportion_test(a, b);
    Ok(IndependenceTest {
        z,
        p_value,
        pass: p_value >= SIGNIFICANCE,
    })
}
