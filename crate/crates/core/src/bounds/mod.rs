//! Security bounds against a dishonest Bob and their numerical checks.
//!
//! The closed forms live here; [`operators`] builds the projectors used in
//! the bound's derivation, [`trace`] evaluates a concrete attack's success
//! probability through the purified picture, and [`lemmas`] spot-checks the
//! two operator-norm inequalities the derivation relies on.

pub mod lemmas;
pub mod operators;
pub mod trace;

pub use lemmas::{lemma_checks, xor_family_is_orthogonal, LemmaReport};
pub use operators::{
    build_d, build_fg, build_fg_shifted, norm_identity_check, MeasurementFamily, NormCase,
    NormIdentityReport, OperatorMatrix,
};
pub use trace::{dense_pn_via_trace, exact_pn_gamma_via_trace, exact_pn_via_trace, OperatorStrategy};

use thiserror::Error;

use crate::bits::{tolerated_errors, BitString};
use crate::qstate::QStateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("n must be at least 1")]
    ZeroN,
    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("n = {n} exceeds the limit {max} for this computation")]
    TooLarge { n: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Quantum(#[from] QStateError),
}

/// Single-pair base `1/2 + 1/(2 sqrt 2)` of the bound.
pub const BOUND_BASE: f64 = 0.5 + 0.5 * std::f64::consts::FRAC_1_SQRT_2;

/// Success probability per pair of the ξ-basis attack.
pub const XI_PAIR_PROBABILITY: f64 = 0.75;

/// `(1/2 + 1/(2 sqrt 2))^n`.
pub fn security_bound(n: usize) -> f64 {
    BOUND_BASE.powi(n as i32)
}

/// `2^-n sum_w C(n, w) 2^{-w/2}`, the sum the closed form collapses.
pub fn binomial_sum_bound(n: usize) -> f64 {
    let mut binom = 1.0f64;
    let mut total = 0.0;
    for w in 0..=n {
        total += binom * std::f64::consts::FRAC_1_SQRT_2.powi(w as i32);
        binom = binom * (n - w) as f64 / (w + 1) as f64;
    }
    total / 2f64.powi(n as i32)
}

fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<(), BoundsError> {
    if (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(BoundsError::OutOfRange { name, value, min, max })
    }
}

/// `-g log2 g - (1 - g) log2 (1 - g)` with `h(0) = h(1) = 0`.
pub fn binary_entropy(gamma: f64) -> Result<f64, BoundsError> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(gamma) + term(1.0 - gamma))
}

/// `2^{2 n h(gamma)} (1/2 + 1/(2 sqrt 2))^n`.
pub fn error_bound(n: usize, gamma: f64) -> Result<f64, BoundsError> {
    check_range("gamma", gamma, 0.0, 0.5)?;
    let h = binary_entropy(gamma)?;
    Ok((2.0 * n as f64 * h).exp2() * security_bound(n))
}

/// Per-pair base `2^{2 h(gamma)} (1/2 + 1/(2 sqrt 2))` of the error bound.
pub fn error_bound_base(gamma: f64) -> Result<f64, BoundsError> {
    error_bound(1, gamma)
}

pub const THRESHOLD_TOL: f64 = 1e-6;

/// Root of `2^{2 h(gamma)} (1/2 + 1/(2 sqrt 2)) = 1` on `(0, 1/2)` by
/// bisection. Below it the error-tolerant bound decays with `n`.
pub fn gamma_threshold() -> f64 {
    let f = |g: f64| error_bound_base(g).expect("gamma in range") - 1.0;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub const MAX_COUNTING_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingCheck {
    pub n: usize,
    pub gamma: f64,
    /// Number of pairs `(q0, q1)` with both weights at most `gamma n`.
    pub count: u64,
    /// `2^{2 n h(gamma)}`.
    pub bound: f64,
    pub ok: bool,
}

/// Counts the error patterns tolerated at `gamma` by enumerating all
/// strings of length `n`. The pair set is a product, so its size is the
/// square of the single-string count.
pub fn counting_check(n: usize, gamma: f64) -> Result<CountingCheck, BoundsError> {
    if n > MAX_COUNTING_N {
        return Err(BoundsError::TooLarge { n, max: MAX_COUNTING_N });
    }
    check_range("gamma", gamma, 0.0, 0.5)?;
    let limit = tolerated_errors(n, gamma);
    let single = BitString::all(n).filter(|q| q.weight() <= limit).count() as u64;
    let count = single * single;
    let bound = (2.0 * n as f64 * binary_entropy(gamma)?).exp2();
    Ok(CountingCheck {
        n,
        gamma,
        count,
        bound,
        ok: count as f64 <= bound * (1.0 + 1e-12),
    })
}

/// Error patterns `(q0, q1)` with both weights at most `gamma n`.
pub fn error_patterns(n: usize, gamma: f64) -> Vec<(BitString, BitString)> {
    let limit = tolerated_errors(n, gamma);
    let light: Vec<BitString> = BitString::all(n).filter(|q| q.weight() <= limit).collect();
    light
        .iter()
        .flat_map(|a| light.iter().map(move |b| (a.clone(), b.clone())))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub bound: f64,
    /// `(3/4)^n`, reached by the ξ-basis attack.
    pub cheat_lower: f64,
    pub gap: f64,
    pub gamma: Option<f64>,
    pub entropy: Option<f64>,
    pub error_bound: Option<f64>,
}

pub fn bound_report(n: usize, gamma: Option<f64>) -> Result<BoundReport, BoundsError> {
    if n == 0 {
        return Err(BoundsError::ZeroN);
    }
    let bound = security_bound(n);
    let cheat_lower = XI_PAIR_PROBABILITY.powi(n as i32);
    let (entropy, err) = match gamma {
        Some(g) => (Some(binary_entropy(g)?), Some(error_bound(n, g)?)),
        None => (None, None),
    };
    Ok(BoundReport {
        n,
        bound,
        cheat_lower,
        gap: bound - cheat_lower,
        gamma,
        entropy,
        error_bound: err,
    })
}
