use num_complex::Complex64;

use crate::linalg::{c, CMatrix, CVector};

/// `|a>` in the computational basis.
pub fn ket(a: bool) -> CVector {
    if a {
        CVector::from_vec(vec![c(0.0), c(1.0)])
    } else {
        CVector::from_vec(vec![c(1.0), c(0.0)])
    }
}

/// `|a^> = (|0> + (-1)^a |1>) / sqrt 2`.
pub fn hadamard_ket(a: bool) -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![c(h), c(if a { -h } else { h })])
}

/// Two-qubit amplitudes (order `A0 A1`) of the pair state with `r0` in the
/// computational basis on qubit `s` and `r1` in the Hadamard basis on the
/// other qubit.
pub fn bb84_pair_vector(r0: bool, r1: bool, s: bool) -> CVector {
    let comp = ket(r0);
    let had = hadamard_ket(r1);
    if s {
        had.kronecker(&comp)
    } else {
        comp.kronecker(&had)
    }
}

/// Outcome index of a two-bit label `(l0, l1)`.
pub fn pair_index(l0: bool, l1: bool) -> usize {
    ((l0 as usize) << 1) | l1 as usize
}

/// Inverse of [`pair_index`].
pub fn pair_label(index: usize) -> (bool, bool) {
    (index & 2 != 0, index & 1 != 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisKind {
    Computational,
    Hadamard,
    Xi,
    Other(String),
}

/// Orthonormal basis of a finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub kind: BasisKind,
    pub vectors: Vec<CVector>,
}

impl Basis {
    pub fn new(kind: BasisKind, vectors: Vec<CVector>) -> Self {
        Basis { kind, vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }

    pub fn gram(&self) -> CMatrix {
        let k = self.vectors.len();
        CMatrix::from_fn(k, k, |i, j| self.vectors[i].dotc(&self.vectors[j]))
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.vectors.len();
        if k != self.dim() {
            return f64::INFINITY;
        }
        crate::linalg::max_abs_diff(&self.gram(), &crate::linalg::identity(k))
    }

    /// Product basis; outcome index `i * other.len() + j`.
    pub fn product(&self, other: &Basis) -> Basis {
        let vectors = self
            .vectors
            .iter()
            .flat_map(|a| other.vectors.iter().map(move |b| a.kronecker(b)))
            .collect();
        Basis::new(
            BasisKind::Other(format!("{:?}x{:?}", self.kind, other.kind)),
            vectors,
        )
    }

    /// Basis vectors as the rows of a unitary, so that `u * psi` lists the
    /// outcome amplitudes.
    pub fn bra_matrix(&self) -> CMatrix {
        let k = self.vectors.len();
        CMatrix::from_fn(k, self.dim(), |i, j| self.vectors[i][j].conj())
    }
}

pub fn computational_basis() -> Basis {
    Basis::new(BasisKind::Computational, vec![ket(false), ket(true)])
}

pub fn hadamard_basis() -> Basis {
    Basis::new(BasisKind::Hadamard, vec![hadamard_ket(false), hadamard_ket(true)])
}

/// The four pair states with basis choice `s`, indexed by
/// [`pair_index`]`(r0, r1)`.
pub fn bb84_pairs_basis(s: bool) -> Basis {
    let vectors = (0..4)
        .map(|idx| {
            let (r0, r1) = pair_label(idx);
            bb84_pair_vector(r0, r1, s)
        })
        .collect();
    Basis::new(BasisKind::Other(format!("pairs(s={})", s as u8)), vectors)
}

/// Coefficients of `|xi_l>` (row, indexed by [`pair_index`]) over the
/// `s = 0` pair states `|psi_00>, |psi_01>, |psi_10>, |psi_11>`.
pub fn xi_coefficients() -> [[f64; 4]; 4] {
    let a = 3f64.sqrt() / 2.0;
    let b = 1.0 / (2.0 * 3f64.sqrt());
    [
        [a, b, -b, -b],
        [-b, a, b, -b],
        [b, -b, a, -b],
        [-b, -b, -b, -a],
    ]
}

/// Two-qubit basis used by the memoryless double-guessing attack.
pub fn xi_basis() -> Basis {
    let psi0 = bb84_pairs_basis(false);
    let coeffs = xi_coefficients();
    let vectors = coeffs
        .iter()
        .map(|row| {
            row.iter()
                .zip(&psi0.vectors)
                .fold(CVector::zeros(4), |acc, (&w, v)| acc + v * Complex64::new(w, 0.0))
        })
        .collect();
    Basis::new(BasisKind::Xi, vectors)
}
