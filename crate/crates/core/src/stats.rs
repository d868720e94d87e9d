//! Small hypothesis tests and Monte-Carlo summaries.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Sample proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        Proportion { successes, trials }
    }

    pub fn estimate(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.successes as f64 / self.trials as f64
    }

    /// `sqrt(p (1 - p) / trials)` at the estimate.
    pub fn standard_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.estimate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Standard error under a hypothesised true value `p`; used when the
    /// estimate itself may sit at 0 or 1.
    pub fn standard_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// Two-sided two-proportion z-test with pooled variance. Returns
/// `(z, p_value)`; degenerate pooled rates give `(0, 1)`.
pub fn two_proportion_test(a: Proportion, b: Proportion) -> (f64, f64) {
    let pooled = (a.successes + b.successes) as f64 / (a.trials + b.trials) as f64;
    let var = pooled * (1.0 - pooled) * (1.0 / a.trials as f64 + 1.0 / b.trials as f64);
    if !(var > 0.0) {
        return (0.0, 1.0);
    }
    let z = (a.estimate() - b.estimate()) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = 2.0 * (1.0 - normal.cdf(z.abs()));
    (z, p.clamp(0.0, 1.0))
}

/// Pearson chi-square test of homogeneity for a table of counts (rows are
/// samples, columns categories). Columns that are empty in every row are
/// dropped. Returns `(statistic, degrees_of_freedom, p_value)`.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> (f64, usize, f64) {
    let cols = table.first().map_or(0, |r| r.len());
    let col_totals: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let live: Vec<usize> = (0..cols).filter(|&j| col_totals[j] > 0).collect();
    let row_totals: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let total: u64 = row_totals.iter().sum();
    let df = (table.len().saturating_sub(1)) * live.len().saturating_sub(1);
    if df == 0 || total == 0 {
        return (0.0, df, 1.0);
    }
    let mut stat = 0.0;
    for (i, row) in table.iter().enumerate() {
        for &j in &live {
            let expected = row_totals[i] as f64 * col_totals[j] as f64 / total as f64;
            if expected > 0.0 {
                let d = row[j] as f64 - expected;
                stat += d * d / expected;
            }
        }
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    (stat, df, (1.0 - dist.cdf(stat)).clamp(0.0, 1.0))
}
