//! Dense statevector engine.
//!
//! A [`StateVector`] is a normalized amplitude vector over an ordered list of
//! named registers. The first register is the most significant digit of the
//! amplitude index. Pair registers for the `j`-th transmitted pair are
//! labeled `A0_j`, `A1_j` (one-based `j`); Alice's purifying registers in
//! the entanglement-based picture are `C0_j`, `C1_j`.

mod basis;
mod measurement;

pub use basis::{
    bb84_pair_vector, bb84_pairs_basis, computational_basis, hadamard_basis, hadamard_ket, ket,
    pair_index, pair_label, xi_basis, xi_coefficients, Basis, BasisKind,
};
pub use measurement::ProjectiveMeasurement;

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::bits::BitString;
use crate::linalg::{CMatrix, CVector, ZERO};

/// Constructed states must have unit norm to this tolerance.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for projector and completeness checks.
pub const OPERATOR_TOL: f64 = 1e-10;
/// Largest supported total dimension.
pub const MAX_DIMENSION: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QStateError {
    #[error("register dimensions multiply to {expected} but {actual} amplitudes were given")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("total dimension {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("unknown register {0:?}")]
    UnknownRegister(String),
    #[error("register {0:?} appears twice")]
    DuplicateRegister(String),
    #[error("input strings have different lengths")]
    LengthMismatch,
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("sampled a zero-probability branch (total probability {0})")]
    ZeroProbabilityBranch(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    pub label: String,
    pub dim: usize,
}

impl Register {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Register {
            label: label.into(),
            dim,
        }
    }

    pub fn qubit(label: impl Into<String>) -> Self {
        Register::new(label, 2)
    }
}

/// `A0_j`, `C1_j`, ... with one-based pair index `j`.
pub fn register_label(prefix: char, qubit: usize, pair: usize) -> String {
    format!("{prefix}{qubit}_{pair}")
}

/// Qubit registers `P0_1 P1_1 ... P0_n P1_n` for prefix `P`.
pub fn pair_registers(prefix: char, n: usize) -> Vec<Register> {
    (1..=n)
        .flat_map(|j| (0..2).map(move |i| Register::qubit(register_label(prefix, i, j))))
        .collect()
}

#[derive(Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    registers: Vec<Register>,
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.registers.iter().map(|r| r.label.as_str()).collect();
        f.debug_struct("StateVector")
            .field("registers", &labels)
            .field("amplitudes", &self.amplitudes.as_slice())
            .finish()
    }
}

impl StateVector {
    pub fn new(amplitudes: CVector, registers: Vec<Register>) -> Result<Self, QStateError> {
        let expected = checked_dimension(&registers)?;
        if expected != amplitudes.len() {
            return Err(QStateError::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        for (k, r) in registers.iter().enumerate() {
            if registers[..k].iter().any(|o| o.label == r.label) {
                return Err(QStateError::DuplicateRegister(r.label.clone()));
            }
        }
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(QStateError::NotNormalized(norm_sq));
        }
        Ok(StateVector {
            amplitudes,
            registers,
        })
    }

    /// Normalizes `amplitudes` before construction.
    pub fn normalized(amplitudes: CVector, registers: Vec<Register>) -> Result<Self, QStateError> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QStateError::NotNormalized(norm * norm));
        }
        StateVector::new(amplitudes.unscale(norm), registers)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn register_index(&self, label: &str) -> Result<usize, QStateError> {
        self.registers
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| QStateError::UnknownRegister(label.to_string()))
    }

    /// Same amplitudes under new register labels.
    pub fn relabel(&self, labels: &[&str]) -> Result<StateVector, QStateError> {
        if labels.len() != self.registers.len() {
            return Err(QStateError::LengthMismatch);
        }
        let registers = self
            .registers
            .iter()
            .zip(labels)
            .map(|(r, l)| Register::new(*l, r.dim))
            .collect();
        StateVector::new(self.amplitudes.clone(), registers)
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QStateError> {
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        checked_dimension(&registers)?;
        StateVector::new(self.amplitudes.kronecker(&other.amplitudes), registers)
    }

    /// `<self|other>`. Only the register dimensions have to agree.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, QStateError> {
        let dims = |s: &StateVector| s.registers.iter().map(|r| r.dim).collect::<Vec<_>>();
        if dims(self) != dims(other) {
            return Err(QStateError::DimensionMismatch {
                expected: self.dimension(),
                actual: other.dimension(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, QStateError> {
        Ok(self.inner(other)?.norm())
    }

    fn indices_of(&self, labels: &[String]) -> Result<Vec<usize>, QStateError> {
        labels.iter().map(|l| self.register_index(l)).collect()
    }

    /// `(op ⊗ 1) |self>` where `op` acts on the listed registers in the
    /// given order. The result is not renormalized.
    pub fn apply_local(&self, op: &CMatrix, labels: &[String]) -> Result<CVector, QStateError> {
        let targets = self.indices_of(labels)?;
        let layout = Layout::new(&self.registers, &targets);
        if op.nrows() != layout.target_dim || op.ncols() != layout.target_dim {
            return Err(QStateError::InvalidMeasurement(format!(
                "operator of size {}x{} on registers of dimension {}",
                op.nrows(),
                op.ncols(),
                layout.target_dim
            )));
        }
        let mut out = CVector::from_element(self.dimension(), ZERO);
        let mut local = CVector::from_element(layout.target_dim, ZERO);
        for &base in &layout.rest_offsets {
            for (t, &off) in layout.target_offsets.iter().enumerate() {
                local[t] = self.amplitudes[base + off];
            }
            let image = op * &local;
            for (t, &off) in layout.target_offsets.iter().enumerate() {
                out[base + off] = image[t];
            }
        }
        Ok(out)
    }

    /// Born probabilities of every outcome of `m`.
    pub fn probabilities(&self, m: &ProjectiveMeasurement) -> Result<Vec<f64>, QStateError> {
        m.projectors()
            .iter()
            .map(|p| Ok(self.apply_local(p, m.registers())?.norm_squared()))
            .collect()
    }

    /// Probability of `outcome` and the renormalized post-measurement state.
    pub fn project(
        &self,
        m: &ProjectiveMeasurement,
        outcome: usize,
    ) -> Result<(f64, StateVector), QStateError> {
        let p = m.projectors().get(outcome).ok_or_else(|| {
            QStateError::InvalidMeasurement(format!("no outcome {outcome}"))
        })?;
        let image = self.apply_local(p, m.registers())?;
        let prob = image.norm_squared();
        if prob <= f64::MIN_POSITIVE {
            return Err(QStateError::ZeroProbabilityBranch(prob));
        }
        let post = StateVector::normalized(image, self.registers.clone())?;
        Ok((prob, post))
    }

    /// Samples an outcome of `m` by the Born rule and returns it together
    /// with the collapsed state.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        m: &ProjectiveMeasurement,
        rng: &mut R,
    ) -> Result<(usize, StateVector), QStateError> {
        let probs = self.probabilities(m)?;
        let outcome = sample_index(&probs, rng)?;
        let (_, post) = self.project(m, outcome)?;
        Ok((outcome, post))
    }

    /// Partial inner product `(<bra|_X ⊗ 1) |self>` over the registers
    /// `labels` (in that order). Returns the unnormalized vector on the
    /// remaining registers together with those registers.
    pub fn contract(
        &self,
        labels: &[String],
        bra: &CVector,
    ) -> Result<(CVector, Vec<Register>), QStateError> {
        let targets = self.indices_of(labels)?;
        let layout = Layout::new(&self.registers, &targets);
        if bra.len() != layout.target_dim {
            return Err(QStateError::DimensionMismatch {
                expected: layout.target_dim,
                actual: bra.len(),
            });
        }
        let rest: Vec<Register> = self
            .registers
            .iter()
            .enumerate()
            .filter(|(k, _)| !targets.contains(k))
            .map(|(_, r)| r.clone())
            .collect();
        let out = CVector::from_iterator(
            layout.rest_offsets.len(),
            layout.rest_offsets.iter().map(|&base| {
                layout
                    .target_offsets
                    .iter()
                    .enumerate()
                    .map(|(t, &off)| bra[t].conj() * self.amplitudes[base + off])
                    .sum::<Complex64>()
            }),
        );
        Ok((out, rest))
    }

    /// Reduced density matrix on `keep` (in that order).
    pub fn reduced_density(&self, keep: &[String]) -> Result<CMatrix, QStateError> {
        let targets = self.indices_of(keep)?;
        let layout = Layout::new(&self.registers, &targets);
        let d = layout.target_dim;
        let mut rho = CMatrix::from_element(d, d, ZERO);
        for &base in &layout.rest_offsets {
            for (i, &oi) in layout.target_offsets.iter().enumerate() {
                let ai = self.amplitudes[base + oi];
                if ai == ZERO {
                    continue;
                }
                for (j, &oj) in layout.target_offsets.iter().enumerate() {
                    rho[(i, j)] += ai * self.amplitudes[base + oj].conj();
                }
            }
        }
        Ok(rho)
    }
}

/// Index bookkeeping for acting on a subset of registers.
struct Layout {
    target_dim: usize,
    target_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
}

impl Layout {
    fn new(registers: &[Register], targets: &[usize]) -> Self {
        let mut strides = vec![1usize; registers.len()];
        for k in (0..registers.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * registers[k + 1].dim;
        }
        let offsets = |regs: &[usize]| -> Vec<usize> {
            let mut offs = vec![0usize];
            for &r in regs {
                let stride = strides[r];
                offs = offs
                    .iter()
                    .flat_map(|&o| (0..registers[r].dim).map(move |d| o + d * stride))
                    .collect();
            }
            offs
        };
        let rest: Vec<usize> = (0..registers.len()).filter(|k| !targets.contains(k)).collect();
        let target_offsets = offsets(targets);
        Layout {
            target_dim: target_offsets.len(),
            target_offsets,
            rest_offsets: offsets(&rest),
        }
    }
}

fn checked_dimension(registers: &[Register]) -> Result<usize, QStateError> {
    registers.iter().try_fold(1usize, |acc, r| {
        acc.checked_mul(r.dim)
            .filter(|&d| d <= MAX_DIMENSION)
            .ok_or(QStateError::TooLarge(acc.saturating_mul(r.dim)))
    })
}

/// Draws an index with probability proportional to `weights`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize, QStateError> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(QStateError::ZeroProbabilityBranch(total));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (k, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last_positive = Some(k);
        if u < acc {
            return Ok(k);
        }
    }
    last_positive.ok_or(QStateError::ZeroProbabilityBranch(total))
}

/// Pair state `|r0>` on `A_s` and `|r1^>` on the other qubit, registers
/// `(A0, A1)`.
pub fn bb84_pair_state(r0: bool, r1: bool, s: bool) -> StateVector {
    StateVector::new(
        bb84_pair_vector(r0, r1, s),
        vec![Register::qubit("A0"), Register::qubit("A1")],
    )
    .expect("pair states are normalized")
}

/// Product of pair states over `A0_1 A1_1 ... A0_n A1_n`.
pub fn full_state(r0: &BitString, r1: &BitString, s: &BitString) -> Result<StateVector, QStateError> {
    let n = s.len();
    if r0.len() != n || r1.len() != n {
        return Err(QStateError::LengthMismatch);
    }
    if 2 * n > 24 {
        return Err(QStateError::TooLarge(usize::MAX));
    }
    StateVector::new(
        full_state_vector(r0, r1, s),
        pair_registers('A', n),
    )
}

/// Amplitudes of [`full_state`] without register bookkeeping; callers
/// guarantee equal lengths.
pub fn full_state_vector(r0: &BitString, r1: &BitString, s: &BitString) -> CVector {
    let factors: Vec<CVector> = (0..s.len())
        .map(|j| bb84_pair_vector(r0.get(j), r1.get(j), s.get(j)))
        .collect();
    crate::linalg::kron_vec_all(&factors)
}

/// `2n` maximally entangled pairs `C_i^j A_i^j`. All `C` registers come
/// first (`C0_1 C1_1 ... C0_n C1_n`), then the `A` registers in the same
/// interleaved order, so the amplitude is `2^-n` on every `|x>_C |x>_A`.
pub fn epr_source(n: usize) -> Result<StateVector, QStateError> {
    if n == 0 {
        return Err(QStateError::LengthMismatch);
    }
    if 4 * n > 24 {
        return Err(QStateError::TooLarge(usize::MAX));
    }
    let half = 1usize << (2 * n);
    let amp = Complex64::new(1.0 / (1u64 << n) as f64, 0.0);
    let mut amplitudes = CVector::from_element(half * half, ZERO);
    for x in 0..half {
        amplitudes[x * half + x] = amp;
    }
    let mut registers = pair_registers('C', n);
    registers.extend(pair_registers('A', n));
    StateVector::new(amplitudes, registers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::seed::SeedTree;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &CVector, b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - c(*y)).norm() < NORM_TOL)
    }

    #[test]
    fn pair_state_amplitudes() {
        assert!(close(
            bb84_pair_state(false, false, false).amplitudes(),
            &[H, H, 0.0, 0.0]
        ));
        // s = 1 swaps which qubit carries the computational bit
        assert!(close(
            bb84_pair_state(false, false, true).amplitudes(),
            &[H, 0.0, H, 0.0]
        ));
    }

    #[test]
    fn pair_state_overlaps() {
        let a = bb84_pair_state(false, false, false);
        let b = bb84_pair_state(false, true, false);
        let d = bb84_pair_state(false, false, true);
        assert!(a.inner(&b).unwrap().norm() < NORM_TOL);
        assert!((a.inner(&d).unwrap() - c(0.5)).norm() < NORM_TOL);
    }

    #[test]
    fn full_state_rejects_length_mismatch() {
        let r0 = BitString::zeros(2);
        let r1 = BitString::zeros(3);
        assert_eq!(
            full_state(&r0, &r1, &BitString::zeros(2)),
            Err(QStateError::LengthMismatch)
        );
    }

    #[test]
    fn full_state_single_pair_matches_pair_state() {
        for v in 0..8u64 {
            let bits = BitString::from_index(v, 3);
            let (r0, r1, s) = (bits.get(0), bits.get(1), bits.get(2));
            let full = full_state(
                &BitString::from_bits(vec![r0]),
                &BitString::from_bits(vec![r1]),
                &BitString::from_bits(vec![s]),
            )
            .unwrap();
            let pair = bb84_pair_state(r0, r1, s);
            assert!((full.fidelity(&pair).unwrap() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn same_basis_states_are_orthogonal() {
        for n in 1..=2 {
            for s in BitString::all(n) {
                let states: Vec<_> = BitString::all(2 * n)
                    .map(|r| {
                        let r0 = r.restrict(&(0..n).collect::<Vec<_>>()).unwrap();
                        let r1 = r.restrict(&(n..2 * n).collect::<Vec<_>>()).unwrap();
                        full_state(&r0, &r1, &s).unwrap()
                    })
                    .collect();
                for (i, a) in states.iter().enumerate() {
                    for (j, b) in states.iter().enumerate() {
                        let expected = if i == j { 1.0 } else { 0.0 };
                        assert!((a.inner(b).unwrap().norm() - expected).abs() < NORM_TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn epr_marginal_is_maximally_mixed() {
        let phi = epr_source(1).unwrap();
        let a: Vec<String> = vec!["A0_1".into(), "A1_1".into()];
        let rho = phi.reduced_density(&a).unwrap();
        let expected = crate::linalg::identity(4) * c(0.25);
        assert!(crate::linalg::max_abs_diff(&rho, &expected) < NORM_TOL);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let amps = CVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(
            StateVector::new(amps, vec![Register::qubit("q")]),
            Err(QStateError::NotNormalized(_))
        ));
    }

    #[test]
    fn measure_eigenstate_is_deterministic() {
        let zero = StateVector::new(ket(false), vec![Register::qubit("q")]).unwrap();
        let m = ProjectiveMeasurement::from_basis(&computational_basis(), &["q"]).unwrap();
        let mut rng = SeedTree::new(3).stream("qstate", 0);
        for _ in 0..100 {
            let (o, post) = zero.measure(&m, &mut rng).unwrap();
            assert_eq!(o, 0);
            assert!((post.fidelity(&zero).unwrap() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn sample_index_rejects_all_zero() {
        let mut rng = SeedTree::new(3).stream("qstate", 1);
        assert!(matches!(
            sample_index(&[0.0, 0.0], &mut rng),
            Err(QStateError::ZeroProbabilityBranch(_))
        ));
        assert_eq!(sample_index(&[0.0, 1.0], &mut rng).unwrap(), 1);
    }

    #[test]
    fn dimension_cap_enforced() {
        let regs: Vec<Register> = (0..25).map(|k| Register::qubit(format!("q{k}"))).collect();
        assert!(matches!(checked_dimension(&regs), Err(QStateError::TooLarge(_))));
    }
}
