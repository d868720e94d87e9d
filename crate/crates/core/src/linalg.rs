//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Kronecker product of a sequence of factors, first factor most significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::from_element(1, 1, ONE), |acc, f| acc.kronecker(f))
}

pub fn kron_vec_all<'a>(factors: impl IntoIterator<Item = &'a CVector>) -> CVector {
    factors
        .into_iter()
        .fold(CVector::from_element(1, ONE), |acc, f| acc.kronecker(f))
}

/// Schatten infinity norm: largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5);
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Square root of a positive semidefinite matrix; tiny negative eigenvalues
/// from rounding are clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| c(v.max(0.0).sqrt()));
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Largest entry-wise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deviation of `p` from being an orthogonal projector: the worse of
/// `|p^2 - p|` and `|p^dagger - p|`, entry-wise.
pub fn projector_error(p: &CMatrix) -> f64 {
    max_abs_diff(&(p * p), p).max(max_abs_diff(&p.adjoint(), p))
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase
/// of R's diagonal divided out.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random isometry from `cols` into `rows` dimensions (first columns of a
/// Haar unitary).
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    haar_unitary(rows, rng).columns(0, cols).into_owned()
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}
