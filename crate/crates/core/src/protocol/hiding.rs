//! Distribution of what Alice's agents receive, exactly and by sampling.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{execute, AliceSecrets, AliceView, BranchEnumerator, ProtocolError, ProtocolParams, RngSource};
use crate::bits::BitString;
use crate::stats::chi_square_homogeneity;

pub type ViewDistribution = BTreeMap<AliceView, f64>;

/// Exact distribution of Alice's view for input `b`, averaging uniformly
/// over `secrets` and enumerating every choice on Bob's side.
pub fn alice_view_distribution(
    params: &ProtocolParams,
    b: bool,
    x0: &BitString,
    x1: &BitString,
    secrets: &[AliceSecrets],
) -> Result<ViewDistribution, ProtocolError> {
    let mut dist = ViewDistribution::new();
    let weight = 1.0 / secrets.len() as f64;
    for secret in secrets {
        BranchEnumerator::new().for_each(
            |src| execute(params, b, x0, x1, secret, src),
            |t, p| *dist.entry(t.alice_view()).or_insert(0.0) += weight * p,
        )?;
    }
    Ok(dist)
}

pub fn total_variation(p: &ViewDistribution, q: &ViewDistribution) -> f64 {
    let mut keys: Vec<&AliceView> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Total variation distance between Alice's view for `b = 0` and `b = 1`.
pub fn exact_hiding_distance(
    params: &ProtocolParams,
    x0: &BitString,
    x1: &BitString,
    secrets: &[AliceSecrets],
) -> Result<f64, ProtocolError> {
    let p0 = alice_view_distribution(params, false, x0, x1, secrets)?;
    let p1 = alice_view_distribution(params, true, x0, x1, secrets)?;
    Ok(total_variation(&p0, &p1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HidingChiSquare {
    pub runs_per_input: usize,
    pub categories: usize,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub pass: bool,
}

const MIN_CATEGORY: u64 = 20;

/// Homogeneity test of Alice's view (announced `b'` and number of detected
/// pairs) between `runs` sampled runs with `b = 0` and as many with `b = 1`.
/// Sparse categories are merged with their neighbours before testing.
pub fn hiding_chi_square(params: &ProtocolParams, runs: usize, significance: f64) -> Result<HidingChiSquare, ProtocolError> {
    let seeds = params.seeds().subtree("hiding");
    let n = params.n;
    let sample = |b: bool| -> Result<Vec<(Option<bool>, usize)>, ProtocolError> {
        let label = if b { "b1" } else { "b0" };
        (0..runs as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = seeds.stream(label, r);
                let secrets = AliceSecrets::random(n, &mut rng);
                let x0 = BitString::random(n, &mut rng);
                let x1 = BitString::random(n, &mut rng);
                let t = execute(params, b, &x0, &x1, &secrets, &mut RngSource(&mut rng))?;
                Ok((t.b_prime, t.surviving.len()))
            })
            .collect()
    };
    let samples = [sample(false)?, sample(true)?];
    let mut counts: BTreeMap<(Option<bool>, usize), [u64; 2]> = BTreeMap::new();
    for (row, keys) in samples.iter().enumerate() {
        for key in keys {
            counts.entry(*key).or_insert([0, 0])[row] += 1;
        }
    }
    let mut columns: Vec<[u64; 2]> = Vec::new();
    let mut pending = [0u64; 2];
    for c in counts.values() {
        pending[0] += c[0];
        pending[1] += c[1];
        if pending[0] + pending[1] >= MIN_CATEGORY {
            columns.push(pending);
            pending = [0, 0];
        }
    }
    if pending[0] + pending[1] > 0 {
        match columns.last_mut() {
            Some(last) => {
                last[0] += pending[0];
                last[1] += pending[1];
            }
            None => columns.push(pending),
        }
    }
    let table: Vec<Vec<u64>> = (0..2).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    let (statistic, degrees_of_freedom, p_value) = chi_square_homogeneity(&table);
    Ok(HidingChiSquare {
        runs_per_input: runs,
        categories: columns.len(),
        statistic,
        degrees_of_freedom,
        p_value,
        pass: p_value >= significance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::standard_geometry;

    #[test]
    fn single_pair_view_is_uniform_b_prime() {
        let params = ProtocolParams::new(1, standard_geometry(1.0, 0.1).unwrap(), 0).unwrap();
        let secrets: Vec<_> = AliceSecrets::all(1).collect();
        let x = BitString::zeros(1);
        let dist = alice_view_distribution(&params, false, &x, &x, &secrets).unwrap();
        assert_eq!(dist.len(), 2);
        for p in dist.values() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_between_distinct_distributions() {
        let params = ProtocolParams::new(1, standard_geometry(1.0, 0.1).unwrap(), 0).unwrap();
        let secrets: Vec<_> = AliceSecrets::all(1).collect();
        let x = BitString::zeros(1);
        let p = alice_view_distribution(&params, false, &x, &x, &secrets).unwrap();
        let mut q = p.clone();
        let first = q.keys().next().unwrap().clone();
        *q.get_mut(&first).unwrap() += 0.25;
        assert!((total_variation(&p, &q) - 0.125).abs() < 1e-12);
    }
}
