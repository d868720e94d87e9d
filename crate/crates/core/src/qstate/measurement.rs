use super::{Basis, QStateError, OPERATOR_TOL};
use crate::linalg::{identity, max_abs_diff, outer, projector_error, CMatrix};

/// Complete set of orthogonal projectors acting on named registers.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    registers: Vec<String>,
    projectors: Vec<CMatrix>,
}

impl ProjectiveMeasurement {
    /// Validates that every projector is idempotent and self-adjoint and that
    /// they sum to the identity.
    pub fn new(registers: &[&str], projectors: Vec<CMatrix>) -> Result<Self, QStateError> {
        let dim = projectors
            .first()
            .map(|p| p.nrows())
            .ok_or_else(|| QStateError::InvalidMeasurement("no outcomes".into()))?;
        let mut total = CMatrix::zeros(dim, dim);
        for (k, p) in projectors.iter().enumerate() {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(QStateError::InvalidMeasurement(format!(
                    "projector {k} has shape {}x{}, expected {dim}x{dim}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            let err = projector_error(p);
            if err > OPERATOR_TOL {
                return Err(QStateError::InvalidMeasurement(format!(
                    "outcome {k} is not a projector (error {err:.3e})"
                )));
            }
            total += p;
        }
        let err = max_abs_diff(&total, &identity(dim));
        if err > OPERATOR_TOL {
            return Err(QStateError::InvalidMeasurement(format!(
                "projectors do not sum to the identity (error {err:.3e})"
            )));
        }
        Ok(ProjectiveMeasurement {
            registers: registers.iter().map(|s| s.to_string()).collect(),
            projectors,
        })
    }

    /// Rank-one measurement in an orthonormal basis; outcome `k` is the
    /// `k`-th basis vector.
    pub fn from_basis(basis: &Basis, registers: &[&str]) -> Result<Self, QStateError> {
        if basis.orthonormality_error() > OPERATOR_TOL {
            return Err(QStateError::InvalidMeasurement(
                "basis is not orthonormal".into(),
            ));
        }
        ProjectiveMeasurement::new(registers, basis.vectors.iter().map(outer).collect())
    }

    /// Coarse-grains a measurement: outcome `k` of the result is the sum of
    /// the original projectors mapped to `k` by `group`.
    pub fn coarse_grained(
        &self,
        outcomes: usize,
        group: impl Fn(usize) -> usize,
    ) -> Result<Self, QStateError> {
        let dim = self.dim();
        let mut projectors = vec![CMatrix::zeros(dim, dim); outcomes];
        for (k, p) in self.projectors.iter().enumerate() {
            let target = group(k);
            if target >= outcomes {
                return Err(QStateError::InvalidMeasurement(format!(
                    "outcome {k} mapped to {target}, only {outcomes} outcomes"
                )));
            }
            projectors[target] += p;
        }
        let regs: Vec<&str> = self.registers.iter().map(String::as_str).collect();
        ProjectiveMeasurement::new(&regs, projectors)
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, |p| p.nrows())
    }

    /// Worst projector or completeness deviation.
    pub fn validity_error(&self) -> f64 {
        let dim = self.dim();
        let mut total = CMatrix::zeros(dim, dim);
        let mut worst = 0.0f64;
        for p in &self.projectors {
            worst = worst.max(projector_error(p));
            total += p;
        }
        worst.max(max_abs_diff(&total, &identity(dim)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::qstate::{computational_basis, hadamard_basis};

    #[test]
    fn incomplete_family_rejected() {
        let b = computational_basis();
        let only_zero = vec![outer(&b.vectors[0])];
        assert!(ProjectiveMeasurement::new(&["q"], only_zero).is_err());
    }

    #[test]
    fn non_projector_rejected() {
        let half = identity(2) * c(0.5);
        assert!(ProjectiveMeasurement::new(&["q"], vec![half.clone(), half]).is_err());
    }

    #[test]
    fn product_measurement_is_valid() {
        let b = computational_basis().product(&hadamard_basis());
        let m = ProjectiveMeasurement::from_basis(&b, &["A0", "A1"]).unwrap();
        assert_eq!(m.outcomes(), 4);
        assert!(m.validity_error() < 1e-12);
        let coarse = m.coarse_grained(2, |k| k >> 1).unwrap();
        assert!(coarse.validity_error() < 1e-12);
    }
}
