//! Success probability of a general attack in the purified picture.
//!
//! Alice's qubits are replaced by halves of EPR pairs whose other halves
//! `C` she keeps; Bob maps the received system `A` isometrically into
//! `B0 ⊗ B1 ⊗ B'`, measures `B'` with `{R^0, R^1}` to get `b'`, and each
//! outpost measures `B_i` with a projective measurement chosen by `s` and
//! `b'`. The success probability is `2^-n sum_s Tr(T_s Ψ)`.

use rand::Rng;

use super::operators::{build_d, MeasurementFamily};
use super::{error_patterns, BoundsError};
use crate::adversary::{JointStrategy, PairStrategy, ProductJoint};
use crate::bits::BitString;
use crate::linalg::{haar_isometry, haar_unitary, identity, kron_all, max_abs_diff, outer, CMatrix, CVector, ZERO};
use crate::qstate::{epr_source, full_state_vector, pair_registers, ProjectiveMeasurement, Register, StateVector, OPERATOR_TOL};

use std::sync::Arc;

/// Isometry, announcement measurement and outpost measurement families.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStrategy {
    pub n: usize,
    pub label: String,
    /// Columns indexed by `A`, rows by `B0 ⊗ B1 ⊗ B'`.
    pub isometry: CMatrix,
    /// Dimensions of `B0`, `B1`, `B'`.
    pub dims: [usize; 3],
    /// `R^0`, `R^1` on `B'`.
    pub announce: [CMatrix; 2],
    /// `families[i][b']` measures `B_i`.
    pub families: [[MeasurementFamily; 2]; 2],
}

impl OperatorStrategy {
    pub fn new(
        n: usize,
        label: &str,
        isometry: CMatrix,
        dims: [usize; 3],
        announce: [CMatrix; 2],
        families: [[MeasurementFamily; 2]; 2],
    ) -> Result<Self, BoundsError> {
        let a_dim = 1usize << (2 * n);
        let b_dim: usize = dims.iter().product();
        if isometry.ncols() != a_dim || isometry.nrows() != b_dim {
            return Err(BoundsError::Dimension(format!(
                "isometry is {}x{}, expected {b_dim}x{a_dim}",
                isometry.nrows(),
                isometry.ncols()
            )));
        }
        let err = max_abs_diff(&(isometry.adjoint() * &isometry), &identity(a_dim));
        if err > OPERATOR_TOL {
            return Err(BoundsError::Dimension(format!("map is not an isometry (error {err:.3e})")));
        }
        ProjectiveMeasurement::new(&["Bp"], announce.to_vec())?;
        for (i, pair) in families.iter().enumerate() {
            for fam in pair {
                if fam.n() != n || fam.dim() != dims[i] {
                    return Err(BoundsError::Dimension(format!(
                        "family for B{i} has n = {} and dimension {}, expected {n} and {}",
                        fam.n(),
                        fam.dim(),
                        dims[i]
                    )));
                }
            }
        }
        Ok(OperatorStrategy {
            n,
            label: label.to_string(),
            isometry,
            dims,
            announce,
            families,
        })
    }

    /// Fully random attack: Haar isometry into `2^n x 2^n x 2` dimensions,
    /// random announcement basis and random outpost measurements.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, BoundsError> {
        let d = 1usize << n;
        let dims = [d, d, 2];
        let v = haar_isometry(d * d * 2, 1 << (2 * n), rng);
        let u = haar_unitary(2, rng);
        let announce = [outer(&u.column(0).into_owned()), outer(&u.column(1).into_owned())];
        let mut fam = |reg: &str| MeasurementFamily::random(n, d, reg, rng);
        let families = [[fam("B0")?, fam("B0")?], [fam("B1")?, fam("B1")?]];
        OperatorStrategy::new(n, "random", v, dims, announce, families)
    }

    /// Encodes a measure-and-guess strategy: `B` measures, writes the outcome
    /// `o` into both `B0` and `B1` and the announcement into `B'`; outpost
    /// `B_i` then reads its guess off `o`. Measurements with projectors of
    /// rank above one keep the post-measurement state in `B'`.
    pub fn from_joint(strategy: &dyn JointStrategy, n: usize) -> Result<Self, BoundsError> {
        let m = strategy
            .measurement(n)
            .map_err(|e| BoundsError::Dimension(e.to_string()))?;
        let a_dim = 1usize << (2 * n);
        let outcomes = m.outcomes();
        let rank_one = m.projectors().iter().all(|p| (p.trace().re - 1.0).abs() < 1e-9);
        let residual = if rank_one { 1 } else { a_dim };
        let dims = [outcomes, outcomes, 2 * residual];
        let mut v = CMatrix::zeros(outcomes * outcomes * 2 * residual, a_dim);
        let announcements: Vec<bool> = (0..outcomes).map(|o| strategy.announce(o)).collect();
        for (o, p) in m.projectors().iter().enumerate() {
            let base = ((o * outcomes + o) * 2 + announcements[o] as usize) * residual;
            if rank_one {
                let phi = rank_one_vector(p);
                for a in 0..a_dim {
                    v[(base, a)] = phi[a].conj();
                }
            } else {
                for r in 0..a_dim {
                    for a in 0..a_dim {
                        v[(base + r, a)] = p[(r, a)];
                    }
                }
            }
        }
        let bit = |b: bool| {
            let mut m = CMatrix::zeros(2, 2);
            m[(b as usize, b as usize)] = crate::linalg::ONE;
            kron_all([&m, &identity(residual)])
        };
        let announce = [bit(false), bit(true)];
        let strings: Vec<BitString> = BitString::all(n).collect();
        let family = |i: usize, b_prime: bool| -> Result<MeasurementFamily, BoundsError> {
            let reg = if i == 0 { "B0" } else { "B1" };
            let measurements = strings
                .iter()
                .map(|s| {
                    let mut projectors = vec![CMatrix::zeros(outcomes, outcomes); 1 << n];
                    for (o, &ann) in announcements.iter().enumerate() {
                        let e = if ann == b_prime {
                            strategy.guess(i, o, s, b_prime).to_index() as usize
                        } else {
                            0
                        };
                        projectors[e][(o, o)] = crate::linalg::ONE;
                    }
                    ProjectiveMeasurement::new(&[reg], projectors)
                })
                .collect::<Result<Vec<_>, _>>()?;
            MeasurementFamily::new(n, measurements)
        };
        let families = [[family(0, false)?, family(0, true)?], [family(1, false)?, family(1, true)?]];
        OperatorStrategy::new(n, &strategy.name(), v, dims, announce, families)
    }

    pub fn from_pair_strategy(strategy: Arc<dyn PairStrategy>, n: usize) -> Result<Self, BoundsError> {
        OperatorStrategy::from_joint(&ProductJoint(strategy), n)
    }

    /// Joint state `(1_C ⊗ V)|Φ>` on `C ⊗ B0 ⊗ B1 ⊗ B'`.
    pub fn purified_state(&self) -> Result<StateVector, BoundsError> {
        let n = self.n;
        let phi = epr_source(n)?;
        let a_dim = 1usize << (2 * n);
        let phi_mat = CMatrix::from_fn(a_dim, a_dim, |c, a| phi.amplitudes()[c * a_dim + a]);
        let psi = phi_mat * self.isometry.transpose();
        let b_dim = psi.ncols();
        let amplitudes = CVector::from_iterator(a_dim * b_dim, (0..a_dim).flat_map(|c| (0..b_dim).map(move |b| (c, b))).map(|(c, b)| psi[(c, b)]));
        let mut registers = pair_registers('C', n);
        registers.extend([
            Register::new("B0", self.dims[0]),
            Register::new("B1", self.dims[1]),
            Register::new("Bp", self.dims[2]),
        ]);
        Ok(StateVector::new(amplitudes, registers)?)
    }
}

/// Unit vector spanning a rank-one projector.
fn rank_one_vector(p: &CMatrix) -> CVector {
    let j = (0..p.ncols())
        .max_by(|&a, &b| p[(a, a)].re.total_cmp(&p[(b, b)].re))
        .unwrap_or(0);
    let col = p.column(j).into_owned();
    let norm = col.norm();
    col / crate::linalg::c(norm)
}

fn check_n(strategy: &OperatorStrategy, n: usize) -> Result<(), BoundsError> {
    if strategy.n != n {
        return Err(BoundsError::Dimension(format!(
            "strategy built for n = {}, asked for n = {n}",
            strategy.n
        )));
    }
    if n > super::operators::MAX_OPERATOR_N {
        return Err(BoundsError::TooLarge { n, max: super::operators::MAX_OPERATOR_N });
    }
    Ok(())
}

/// `2^-n sum_s sum_q Tr(T^q_s Ψ)` over the given error patterns, evaluated
/// by contracting `<Ψ^s_{r0 r1}|_C` into the purified state.
fn trace_sum(strategy: &OperatorStrategy, patterns: &[(BitString, BitString)]) -> Result<f64, BoundsError> {
    let n = strategy.n;
    let psi = strategy.purified_state()?;
    let c_labels: Vec<String> = pair_registers('C', n).into_iter().map(|r| r.label).collect();
    let strings: Vec<BitString> = BitString::all(n).collect();
    let mut total = 0.0;
    for s in &strings {
        for r0 in &strings {
            for r1 in &strings {
                let bra = full_state_vector(r0, r1, s);
                let (w, _) = psi.contract(&c_labels, &bra)?;
                for b_prime in [false, true] {
                    let (k0, k1) = if b_prime { (r1, r0) } else { (r0, r1) };
                    for (q0, q1) in patterns {
                        let e0 = k0.xor(q0).map_err(|e| BoundsError::Dimension(e.to_string()))?;
                        let e1 = k1.xor(q1).map_err(|e| BoundsError::Dimension(e.to_string()))?;
                        let op = kron_all([
                            strategy.families[0][b_prime as usize].projector(s, &e0),
                            strategy.families[1][b_prime as usize].projector(s, &e1),
                            &strategy.announce[b_prime as usize],
                        ]);
                        total += (op * &w).norm_squared();
                    }
                }
            }
        }
    }
    Ok(total / 2f64.powi(n as i32))
}

/// Success probability of the attack, `2^-n sum_s Tr(T_s Ψ)`.
pub fn exact_pn_via_trace(strategy: &OperatorStrategy, n: usize) -> Result<f64, BoundsError> {
    check_n(strategy, n)?;
    trace_sum(strategy, &[(BitString::zeros(n), BitString::zeros(n))])
}

/// Probability that both outposts land within `floor(gamma n)` errors,
/// summing `Tr(T^q_s Ψ)` over all tolerated error patterns `q`.
pub fn exact_pn_gamma_via_trace(strategy: &OperatorStrategy, n: usize, gamma: f64) -> Result<f64, BoundsError> {
    check_n(strategy, n)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(BoundsError::OutOfRange {
            name: "gamma",
            value: gamma,
            min: 0.0,
            max: 1.0,
        });
    }
    trace_sum(strategy, &error_patterns(n, gamma))
}

/// Largest dimension of `C ⊗ B0 ⊗ B1 ⊗ B'` for the dense evaluation.
pub const MAX_DENSE_DIM: usize = 1024;

/// Same quantity with `T_s = sum_{b'} D^{b'}_s ⊗ R^{b'}` built as a dense
/// matrix and `<Ψ|T_s|Ψ>` taken directly.
pub fn dense_pn_via_trace(strategy: &OperatorStrategy, n: usize) -> Result<f64, BoundsError> {
    check_n(strategy, n)?;
    let psi = strategy.purified_state()?;
    let dim = psi.dimension();
    if dim > MAX_DENSE_DIM {
        return Err(BoundsError::Dimension(format!("dense T_s would have dimension {dim}, limit {MAX_DENSE_DIM}")));
    }
    let mut total = 0.0;
    for s in BitString::all(n) {
        let mut t = CMatrix::from_element(dim, dim, ZERO);
        for b_prime in [false, true] {
            let fam = &strategy.families;
            let d = build_d(n, &s, None, &fam[0][b_prime as usize], &fam[1][b_prime as usize], b_prime)?;
            t += kron_all([&d.matrix, &strategy.announce[b_prime as usize]]);
        }
        let v = psi.amplitudes();
        total += v.dotc(&(&t * v)).re;
    }
    Ok(total / 2f64.powi(n as i32))
}
