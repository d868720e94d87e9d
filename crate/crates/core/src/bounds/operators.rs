//! Dense projectors on `C ⊗ B0 ⊗ B1` for `n <= 2`.
//!
//! `C` holds Alice's halves of the EPR pairs (`4^n` dimensions); `B_i` is
//! the system Bob's outpost `B_i` measures, with one projector per guess
//! `e ∈ {0,1}^n` chosen according to `s` (and, implicitly, `b'`).

use rand::Rng;

use super::BoundsError;
use crate::bits::BitString;
use crate::linalg::{haar_unitary, identity, kron_all, max_abs_diff, outer, projector_error, spectral_norm, CMatrix};
use crate::qstate::{full_state_vector, Basis, BasisKind, ProjectiveMeasurement, Register, OPERATOR_TOL};

/// Largest `n` for which operators are built densely.
pub const MAX_OPERATOR_N: usize = 2;

/// Largest total dimension of `C ⊗ B0 ⊗ B1`.
pub const MAX_OPERATOR_DIM: usize = 256;

/// One projective measurement with `2^n` outcomes per value of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFamily {
    n: usize,
    dim: usize,
    measurements: Vec<ProjectiveMeasurement>,
}

impl MeasurementFamily {
    /// `measurements[s.to_index()]` is used for `s`; outcome `k` stands for
    /// the guess `BitString::from_index(k, n)`.
    pub fn new(n: usize, measurements: Vec<ProjectiveMeasurement>) -> Result<Self, BoundsError> {
        let outcomes = 1usize << n;
        if measurements.len() != outcomes {
            return Err(BoundsError::Dimension(format!(
                "family needs {outcomes} measurements, got {}",
                measurements.len()
            )));
        }
        let dim = measurements[0].dim();
        for m in &measurements {
            if m.outcomes() != outcomes || m.dim() != dim {
                return Err(BoundsError::Dimension(format!(
                    "every measurement needs {outcomes} outcomes on dimension {dim}, got {} on {}",
                    m.outcomes(),
                    m.dim()
                )));
            }
            if m.validity_error() > OPERATOR_TOL {
                return Err(BoundsError::Dimension("family contains an invalid measurement".into()));
            }
        }
        Ok(MeasurementFamily { n, dim, measurements })
    }

    /// Independent Haar-random basis measurements for each `s`. When `dim`
    /// exceeds `2^n`, basis vector `v` is assigned to outcome `v mod 2^n`.
    pub fn random<R: Rng + ?Sized>(n: usize, dim: usize, register: &str, rng: &mut R) -> Result<Self, BoundsError> {
        let outcomes = 1usize << n;
        if dim < outcomes {
            return Err(BoundsError::Dimension(format!(
                "dimension {dim} cannot hold {outcomes} outcomes"
            )));
        }
        let measurements = (0..outcomes)
            .map(|_| {
                let u = haar_unitary(dim, rng);
                let basis = Basis::new(
                    BasisKind::Other("haar".into()),
                    (0..dim).map(|k| u.column(k).into_owned()).collect(),
                );
                ProjectiveMeasurement::from_basis(&basis, &[register])?.coarse_grained(outcomes, |v| v % outcomes)
            })
            .collect::<Result<Vec<_>, _>>()?;
        MeasurementFamily::new(n, measurements)
    }

    /// The same measurement for every `s`.
    pub fn constant(n: usize, m: ProjectiveMeasurement) -> Result<Self, BoundsError> {
        MeasurementFamily::new(n, vec![m; 1 << n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measurement(&self, s: &BitString) -> &ProjectiveMeasurement {
        &self.measurements[s.to_index() as usize]
    }

    /// Projector for guess `e` under `s`.
    pub fn projector(&self, s: &BitString, e: &BitString) -> &CMatrix {
        &self.measurement(s).projectors()[e.to_index() as usize]
    }
}

/// Dense operator with the registers it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: CMatrix,
    pub registers: Vec<Register>,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix, registers: Vec<Register>) -> Result<Self, BoundsError> {
        let dim: usize = registers.iter().map(|r| r.dim).product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(BoundsError::Dimension(format!(
                "matrix is {}x{} but registers give dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(OperatorMatrix { matrix, registers })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn projector_error(&self) -> f64 {
        projector_error(&self.matrix)
    }
}

fn check_inputs(n: usize, meas0: &MeasurementFamily, meas1: &MeasurementFamily) -> Result<Vec<Register>, BoundsError> {
    if n == 0 {
        return Err(BoundsError::ZeroN);
    }
    if n > MAX_OPERATOR_N {
        return Err(BoundsError::TooLarge { n, max: MAX_OPERATOR_N });
    }
    if meas0.n() != n || meas1.n() != n {
        return Err(BoundsError::Dimension("measurement families built for another n".into()));
    }
    let dim = (1usize << (2 * n)) * meas0.dim() * meas1.dim();
    if dim > MAX_OPERATOR_DIM {
        return Err(BoundsError::Dimension(format!(
            "C ⊗ B0 ⊗ B1 has dimension {dim}, limit {MAX_OPERATOR_DIM}"
        )));
    }
    Ok(vec![
        Register::new("C", 1 << (2 * n)),
        Register::new("B0", meas0.dim()),
        Register::new("B1", meas1.dim()),
    ])
}

/// Sum over `(r0, r1)` of `|Ψ^s_{r0 r1}><Ψ^s_{r0 r1}|_C ⊗ X(r0, r1) ⊗ Y(r0, r1)`.
fn sum_over_keys(
    n: usize,
    s: &BitString,
    registers: Vec<Register>,
    mut factors: impl FnMut(&BitString, &BitString) -> (CMatrix, CMatrix),
) -> Result<OperatorMatrix, BoundsError> {
    let dim: usize = registers.iter().map(|r| r.dim).product();
    let mut total = CMatrix::zeros(dim, dim);
    for r0 in BitString::all(n) {
        for r1 in BitString::all(n) {
            let pc = outer(&full_state_vector(&r0, &r1, s));
            let (x, y) = factors(&r0, &r1);
            total += kron_all([&pc, &x, &y]);
        }
    }
    OperatorMatrix::new(total, registers)
}

fn keys(r0: &BitString, r1: &BitString, b_prime: bool) -> (BitString, BitString) {
    if b_prime {
        (r1.clone(), r0.clone())
    } else {
        (r0.clone(), r1.clone())
    }
}

fn shifted(e: &BitString, q: Option<&BitString>) -> Result<BitString, BoundsError> {
    match q {
        Some(q) => e
            .xor(q)
            .map_err(|err| BoundsError::Dimension(err.to_string())),
        None => Ok(e.clone()),
    }
}

/// `D^{b'}_s`, or with error offsets `q = (q0, q1)` the tolerant `D^{q b'}_s`:
/// the projector onto both outposts guessing `r_{b'} ⊕ q0` and
/// `r_{1-b'} ⊕ q1`.
pub fn build_d(
    n: usize,
    s: &BitString,
    q: Option<(&BitString, &BitString)>,
    meas0: &MeasurementFamily,
    meas1: &MeasurementFamily,
    b_prime: bool,
) -> Result<OperatorMatrix, BoundsError> {
    let registers = check_inputs(n, meas0, meas1)?;
    let (q0, q1) = q.map_or((None, None), |(a, b)| (Some(a), Some(b)));
    let mut err = None;
    let d = sum_over_keys(n, s, registers, |r0, r1| {
        let (k0, k1) = keys(r0, r1, b_prime);
        match (shifted(&k0, q0), shifted(&k1, q1)) {
            (Ok(e0), Ok(e1)) => (meas0.projector(s, &e0).clone(), meas1.projector(s, &e1).clone()),
            (Err(e), _) | (_, Err(e)) => {
                err = Some(e);
                (CMatrix::zeros(meas0.dim(), meas0.dim()), CMatrix::zeros(meas1.dim(), meas1.dim()))
            }
        }
    })?;
    err.map_or(Ok(d), Err)
}

/// `F^{b'}_s` and `G^{b'}_{s ⊕ k}`.
pub fn build_fg(
    n: usize,
    s: &BitString,
    k: &BitString,
    meas0: &MeasurementFamily,
    meas1: &MeasurementFamily,
    b_prime: bool,
) -> Result<(OperatorMatrix, OperatorMatrix), BoundsError> {
    build_fg_shifted(n, s, k, None, meas0, meas1, b_prime)
}

/// `F^{q b'}_s` and `G^{q b'}_{s ⊕ k}`: `F` keeps only the condition on
/// `B0` (guess `r_{b'} ⊕ q0` under `s`), `G` only the one on `B1` (guess
/// `r_{1-b'} ⊕ q1` under `s ⊕ k`).
pub fn build_fg_shifted(
    n: usize,
    s: &BitString,
    k: &BitString,
    q: Option<(&BitString, &BitString)>,
    meas0: &MeasurementFamily,
    meas1: &MeasurementFamily,
    b_prime: bool,
) -> Result<(OperatorMatrix, OperatorMatrix), BoundsError> {
    let registers = check_inputs(n, meas0, meas1)?;
    if s.len() != n || k.len() != n {
        return Err(BoundsError::Dimension("s and k must have length n".into()));
    }
    let sk = s.xor(k).map_err(|e| BoundsError::Dimension(e.to_string()))?;
    let (q0, q1) = q.map_or((None, None), |(a, b)| (Some(a), Some(b)));
    let id0 = identity(meas0.dim());
    let id1 = identity(meas1.dim());
    let mut err = None;
    let f = sum_over_keys(n, s, registers.clone(), |r0, r1| {
        let (k0, _) = keys(r0, r1, b_prime);
        match shifted(&k0, q0) {
            Ok(e0) => (meas0.projector(s, &e0).clone(), id1.clone()),
            Err(e) => {
                err = Some(e);
                (id0.clone(), id1.clone())
            }
        }
    })?;
    let g = sum_over_keys(n, &sk, registers, |r0, r1| {
        let (_, k1) = keys(r0, r1, b_prime);
        match shifted(&k1, q1) {
            Ok(e1) => (id0.clone(), meas1.projector(&sk, &e1).clone()),
            Err(e) => {
                err = Some(e);
                (id0.clone(), id1.clone())
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok((f, g)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormCase {
    pub n: usize,
    pub k: BitString,
    pub s: BitString,
    pub b_prime: bool,
    pub norm: f64,
    pub expected: f64,
    /// `|| P^2 - P ||` entrywise for `P = 2^{w(k)} F G F`.
    pub idempotence_error: f64,
    /// Worst projector deviation of `F` and `G`.
    pub projector_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormIdentityReport {
    pub cases: Vec<NormCase>,
    pub max_norm_error: f64,
    pub max_idempotence_error: f64,
    pub max_projector_error: f64,
    pub pass: bool,
}

pub const NORM_IDENTITY_TOL: f64 = 1e-8;

/// For every `k` and `trials` random draws of `(s, b', measurement
/// families)`, checks `||F G F|| = 2^{-w(k)}` and that `2^{w(k)} F G F` is a
/// projector.
pub fn norm_identity_check<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> Result<NormIdentityReport, BoundsError> {
    if n == 0 {
        return Err(BoundsError::ZeroN);
    }
    if n > MAX_OPERATOR_N {
        return Err(BoundsError::TooLarge { n, max: MAX_OPERATOR_N });
    }
    let dim = 1usize << n;
    let mut cases = Vec::new();
    for k in BitString::all(n) {
        for _ in 0..trials {
            let s = BitString::random(n, rng);
            let b_prime = rng.random::<bool>();
            let meas0 = MeasurementFamily::random(n, dim, "B0", rng)?;
            let meas1 = MeasurementFamily::random(n, dim, "B1", rng)?;
            cases.push(norm_case(n, &s, &k, &meas0, &meas1, b_prime)?);
        }
    }
    let max_of = |f: fn(&NormCase) -> f64| cases.iter().map(f).fold(0.0, f64::max);
    let max_norm_error = max_of(|c| (c.norm - c.expected).abs());
    let max_idempotence_error = max_of(|c| c.idempotence_error);
    let max_projector_error = max_of(|c| c.projector_error);
    Ok(NormIdentityReport {
        pass: max_norm_error <= NORM_IDENTITY_TOL && max_idempotence_error <= NORM_IDENTITY_TOL,
        cases,
        max_norm_error,
        max_idempotence_error,
        max_projector_error,
    })
}

/// One evaluation of the norm identity for fixed inputs.
pub fn norm_case(
    n: usize,
    s: &BitString,
    k: &BitString,
    meas0: &MeasurementFamily,
    meas1: &MeasurementFamily,
    b_prime: bool,
) -> Result<NormCase, BoundsError> {
    let (f, g) = build_fg(n, s, k, meas0, meas1, b_prime)?;
    let fgf = &f.matrix * &g.matrix * &f.matrix;
    let w = k.weight() as i32;
    let scaled = &fgf * crate::linalg::c(2f64.powi(w));
    Ok(NormCase {
        n,
        k: k.clone(),
        s: s.clone(),
        b_prime,
        norm: spectral_norm(&fgf),
        expected: 0.5f64.powi(w),
        idempotence_error: max_abs_diff(&(&scaled * &scaled), &scaled),
        projector_error: f.projector_error().max(g.projector_error()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::qstate::computational_basis;
    use crate::seed::SeedTree;

    #[test]
    fn identical_bases_commute_for_k_zero() {
        let m = ProjectiveMeasurement::from_basis(&computational_basis(), &["B"]).unwrap();
        let fam = MeasurementFamily::constant(1, m).unwrap();
        let s = BitString::zeros(1);
        let case = norm_case(1, &s, &BitString::zeros(1), &fam, &fam, false).unwrap();
        assert!((case.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn d_is_dominated_by_f_and_g() {
        let mut rng = SeedTree::new(4).stream("ops", 0);
        let meas0 = MeasurementFamily::random(1, 2, "B0", &mut rng).unwrap();
        let meas1 = MeasurementFamily::random(1, 2, "B1", &mut rng).unwrap();
        for b_prime in [false, true] {
            for s in BitString::all(1) {
                let d = build_d(1, &s, None, &meas0, &meas1, b_prime).unwrap();
                let (f, g) = build_fg(1, &s, &BitString::zeros(1), &meas0, &meas1, b_prime).unwrap();
                assert!(d.projector_error() < 1e-10);
                assert!(min_eigenvalue(&(&f.matrix - &d.matrix)) > -1e-10);
                assert!(min_eigenvalue(&(&g.matrix - &d.matrix)) > -1e-10);
            }
        }
    }

    #[test]
    fn family_shape_checked() {
        let m = ProjectiveMeasurement::from_basis(&computational_basis(), &["B"]).unwrap();
        assert!(MeasurementFamily::new(1, vec![m.clone()]).is_err());
        assert!(MeasurementFamily::constant(2, m).is_err());
    }

    #[test]
    fn oversized_requests_rejected() {
        let mut rng = SeedTree::new(4).stream("ops", 1);
        assert!(matches!(norm_identity_check(3, 1, &mut rng), Err(BoundsError::TooLarge { .. })));
        let big = MeasurementFamily::random(1, 16, "B0", &mut rng).unwrap();
        let s = BitString::zeros(1);
        assert!(build_fg(1, &s, &s, &big, &big, false).is_err());
    }
}
