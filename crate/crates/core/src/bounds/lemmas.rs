//! Random-instance checks of the two operator-norm lemmas behind the bound.
//!
//! * If `A†A >= B†B` then `||A L|| >= ||B L||` for every `L`.
//! * For PSD `D_1..D_N` and mutually orthogonal permutations `σ_k` of
//!   `[N]`, `||sum_i D_i|| <= sum_k max_i ||sqrt(D_i) sqrt(D_{σ_k(i)})||`.

use rand::Rng;

use super::BoundsError;
use crate::bits::BitString;
use crate::linalg::{c, haar_isometry, psd_sqrt, random_matrix, spectral_norm, CMatrix};

pub const MAX_LEMMA_DIM: usize = 32;
pub const MAX_LEMMA_N: usize = 8;
const LEMMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub dim: usize,
    pub lemma1_instances: usize,
    pub lemma1_violations: usize,
    /// Smallest `||A L|| - ||B L||` seen.
    pub lemma1_min_slack: f64,
    pub lemma2_instances: usize,
    pub lemma2_violations: usize,
    /// Smallest `rhs - ||sum D_i||` seen.
    pub lemma2_min_slack: f64,
    /// Whether `s -> s ⊕ k` is a mutually orthogonal family for `n = 1..=3`.
    pub xor_family_orthogonal: bool,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.lemma1_violations == 0 && self.lemma2_violations == 0 && self.xor_family_orthogonal
    }
}

/// `B = W K A` with `K` a contraction and `W` an isometry, so that
/// `B†B = A†K†KA <= A†A`. Returns `||A L|| - ||B L||`.
pub fn lemma1_instance<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> f64 {
    let a = random_matrix(dim, dim, rng);
    let k = random_matrix(dim, dim, rng);
    let k = &k * c(rng.random::<f64>() / spectral_norm(&k));
    let w = haar_isometry(dim + 1, dim, rng);
    let b = w * k * &a;
    let l = random_matrix(dim, dim, rng);
    spectral_norm(&(&a * &l)) - spectral_norm(&(b * l))
}

fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(dim, dim, rng);
    &g * g.adjoint()
}

/// Right-hand side minus left-hand side of the second lemma for `d`
/// random PSD operators and the cyclic shifts `i -> i + k mod N`.
pub fn lemma2_instance<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> f64 {
    let ds: Vec<CMatrix> = (0..count).map(|_| random_psd(dim, rng)).collect();
    let roots: Vec<CMatrix> = ds.iter().map(psd_sqrt).collect();
    let lhs = spectral_norm(&ds.iter().fold(CMatrix::zeros(dim, dim), |acc, d| acc + d));
    let rhs: f64 = (0..count)
        .map(|k| {
            (0..count)
                .map(|i| spectral_norm(&(&roots[i] * &roots[(i + k) % count])))
                .fold(0.0, f64::max)
        })
        .sum();
    rhs - lhs
}

/// True iff `s ⊕ k != s ⊕ k'` for all `s` whenever `k != k'`.
pub fn xor_family_is_orthogonal(n: usize) -> bool {
    let all: Vec<BitString> = BitString::all(n).collect();
    all.iter().enumerate().all(|(a, k)| {
        all.iter().skip(a + 1).all(|k2| {
            all.iter()
                .all(|s| s.xor(k).ok() != s.xor(k2).ok())
        })
    })
}

/// Runs `trials` random instances of each lemma at dimension `dim`, with the
/// number of operators in the second lemma drawn from `1..=8`.
pub fn lemma_checks<R: Rng + ?Sized>(trials: usize, dim: usize, rng: &mut R) -> Result<LemmaReport, BoundsError> {
    if dim == 0 || dim > MAX_LEMMA_DIM {
        return Err(BoundsError::OutOfRange {
            name: "dims",
            value: dim as f64,
            min: 1.0,
            max: MAX_LEMMA_DIM as f64,
        });
    }
    let mut report = LemmaReport {
        dim,
        lemma1_instances: trials,
        lemma1_violations: 0,
        lemma1_min_slack: f64::INFINITY,
        lemma2_instances: trials,
        lemma2_violations: 0,
        lemma2_min_slack: f64::INFINITY,
        xor_family_orthogonal: (1..=3).all(xor_family_is_orthogonal),
    };
    for _ in 0..trials {
        let slack = lemma1_instance(dim, rng);
        report.lemma1_min_slack = report.lemma1_min_slack.min(slack);
        report.lemma1_violations += (slack < -LEMMA_TOL) as usize;
        let count = rng.random_range(1..=MAX_LEMMA_N);
        let slack = lemma2_instance(dim, count, rng);
        report.lemma2_min_slack = report.lemma2_min_slack.min(slack);
        report.lemma2_violations += (slack < -LEMMA_TOL) as usize;
    }
    Ok(report)
}
