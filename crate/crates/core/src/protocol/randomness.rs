//! Sources for the random choices Bob's side makes during a run.
//!
//! A run draws Bob's basis bit, per-qubit detection events and every
//! measurement outcome through a [`ChoiceSource`]. Sampling runs use
//! [`RngSource`]; exact distribution checks use [`BranchEnumerator`], which
//! replays the run once per branch of the choice tree together with the
//! branch probability.

use rand::Rng;

use crate::qstate::{sample_index, QStateError};

pub trait ChoiceSource {
    /// Picks an index with probability proportional to `weights`.
    fn choose(&mut self, weights: &[f64]) -> Result<usize, QStateError>;
}

pub struct RngSource<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> ChoiceSource for RngSource<'_, R> {
    fn choose(&mut self, weights: &[f64]) -> Result<usize, QStateError> {
        sample_index(weights, self.0)
    }
}

#[derive(Debug, Clone)]
struct Draw {
    chosen: usize,
    weights: Vec<f64>,
}

/// Depth-first walk over every nonzero-probability branch.
#[derive(Debug, Default)]
pub struct BranchEnumerator {
    forced: Vec<usize>,
    draws: Vec<Draw>,
    exhausted: bool,
}

impl BranchEnumerator {
    pub fn new() -> Self {
        BranchEnumerator::default()
    }

    /// Runs `run` once for every branch and hands each result to `visit`
    /// together with its probability.
    pub fn for_each<T, E>(
        mut self,
        mut run: impl FnMut(&mut dyn ChoiceSource) -> Result<T, E>,
        mut visit: impl FnMut(T, f64),
    ) -> Result<usize, E> {
        let mut branches = 0;
        while !self.exhausted {
            self.draws.clear();
            let mut replay = Replay {
                enumerator: &mut self,
                pos: 0,
            };
            let out = run(&mut replay)?;
            let prob = self.branch_probability();
            visit(out, prob);
            branches += 1;
            self.advance();
        }
        Ok(branches)
    }

    fn branch_probability(&self) -> f64 {
        self.draws
            .iter()
            .map(|d| d.weights[d.chosen] / d.weights.iter().sum::<f64>())
            .product()
    }

    fn advance(&mut self) {
        while let Some(last) = self.draws.pop() {
            if let Some(next) = (last.chosen + 1..last.weights.len()).find(|&k| last.weights[k] > 0.0) {
                self.forced = self.draws.iter().map(|d| d.chosen).collect();
                self.forced.push(next);
                return;
            }
        }
        self.exhausted = true;
    }
}

struct Replay<'a> {
    enumerator: &'a mut BranchEnumerator,
    pos: usize,
}

impl ChoiceSource for Replay<'_> {
    fn choose(&mut self, weights: &[f64]) -> Result<usize, QStateError> {
        let chosen = match self.enumerator.forced.get(self.pos) {
            Some(&k) => k,
            None => weights
                .iter()
                .position(|&w| w > 0.0)
                .ok_or(QStateError::ZeroProbabilityBranch(0.0))?,
        };
        if weights.get(chosen).map_or(true, |&w| w <= 0.0) {
            return Err(QStateError::ZeroProbabilityBranch(0.0));
        }
        self.enumerator.draws.push(Draw {
            chosen,
            weights: weights.to_vec(),
        });
        self.pos += 1;
        Ok(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_all_branches_with_probabilities() {
        let mut seen = Vec::new();
        let branches = BranchEnumerator::new()
            .for_each(
                |src| -> Result<(usize, usize), QStateError> {
                    let a = src.choose(&[0.25, 0.0, 0.75])?;
                    let b = if a == 0 { src.choose(&[1.0, 1.0])? } else { 9 };
                    Ok((a, b))
                },
                |out, p| seen.push((out, p)),
            )
            .unwrap();
        assert_eq!(branches, 3);
        assert_eq!(seen[0], ((0, 0), 0.125));
        assert_eq!(seen[1], ((0, 1), 0.125));
        assert_eq!(seen[2], ((2, 9), 0.75));
        let total: f64 = seen.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}
