use serde::{Deserialize, Serialize};

use super::special::chi2_sf;
use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Pearson chi-squared test of homogeneity on an r×c count table (rows are
/// outcome categories, columns are groups; a 2×D table has D−1 degrees of
/// freedom).
pub fn chi2_homogeneity(table: &[Vec<u64>]) -> Result<ChiSquareTest, MetricsError> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(MetricsError::DegenerateTable);
    }
    for r in table {
        if r.len() != cols {
            return Err(MetricsError::LengthMismatch {
                left: cols,
                right: r.len(),
            });
        }
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    if row_sums.iter().chain(&col_sums).any(|s| *s == 0.0) {
        return Err(MetricsError::DegenerateTable);
    }
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &o) in r.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / total;
            statistic += (o as f64 - e).powi(2) / e;
        }
    }
    let df = ((rows - 1) * (cols - 1)) as u32;
    Ok(ChiSquareTest {
        statistic,
        df,
        p_value: chi2_sf(statistic, df),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// McNemar's test without continuity correction on the discordant counts
/// `b` (first right, second wrong) and `c` (first wrong, second right).
pub fn mcnemar(b: u64, c: u64) -> TestResult {
    if b + c == 0 {
        return TestResult {
            statistic: 0.0,
            p_value: 1.0,
        };
    }
    let diff = b as f64 - c as f64;
    let statistic = diff * diff / (b + c) as f64;
    TestResult {
        statistic,
        p_value: chi2_sf(statistic, 1),
    }
}

/// A paired comparison of two classifiers from their discordant counts.
pub trait PairedTest: Send + Sync {
    fn name(&self) -> &str;
    fn test(&self, b: u64, c: u64) -> TestResult;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct McNemar;

impl PairedTest for McNemar {
    fn name(&self) -> &str {
        "mcnemar"
    }

    fn test(&self, b: u64, c: u64) -> TestResult {
        mcnemar(b, c)
    }
}

/// Multiplies each p-value by the number of comparisons, capped at 1.
pub fn bonferroni(pvals: &[f64]) -> Result<Vec<f64>, MetricsError> {
    let m = pvals.len() as f64;
    pvals
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok((m * p).min(1.0))
            } else {
                Err(MetricsError::OutOfRange(p))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_proportions() {
        let t = chi2_homogeneity(&[vec![10, 90], vec![10, 90]]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.df, 1);
        assert_eq!(t.p_value, 1.0);
    }

    #[test]
    fn two_by_two_hand_value() {
        let t = chi2_homogeneity(&[vec![20, 80], vec![10, 90]]).unwrap();
        let transposed = chi2_homogeneity(&[vec![20, 10], vec![80, 90]]).unwrap();
        assert!((t.statistic - transposed.statistic).abs() < 1e-12);
        assert!((t.statistic - 3.9215686).abs() < 1e-6);
        assert_eq!(t.df, 1);
        assert!((t.p_value - 0.0477).abs() < 1e-4);
    }

    #[test]
    fn two_by_five_has_four_df() {
        let t = chi2_homogeneity(&[vec![188, 151, 106, 96, 34], vec![906, 943, 988, 998, 1060]]).unwrap();
        assert_eq!(t.df, 4);
        assert!(t.p_value < 0.001);
    }

    #[test]
    fn zero_marginal_is_degenerate() {
        assert_eq!(
            chi2_homogeneity(&[vec![0, 0], vec![5, 7]]).unwrap_err(),
            MetricsError::DegenerateTable
        );
        assert_eq!(
            chi2_homogeneity(&[vec![0, 3], vec![0, 7]]).unwrap_err(),
            MetricsError::DegenerateTable
        );
        assert_eq!(
            chi2_homogeneity(&[vec![1, 2]]).unwrap_err(),
            MetricsError::DegenerateTable
        );
    }

    #[test]
    fn mcnemar_examples() {
        assert_eq!(
            mcnemar(5, 5),
            TestResult {
                statistic: 0.0,
                p_value: 1.0
            }
        );
        let t = mcnemar(10, 0);
        assert_eq!(t.statistic, 10.0);
        assert!((t.p_value - 0.0015654).abs() < 1e-6);
        assert_eq!(mcnemar(0, 0).p_value, 1.0);
        assert_eq!(McNemar.test(3, 1), mcnemar(3, 1));
    }

    #[test]
    fn bonferroni_examples() {
        let adj = bonferroni(&[0.01, 0.2, 0.03]).unwrap();
        for (a, e) in adj.iter().zip([0.03, 0.6, 0.09]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(bonferroni(&[0.5, 0.5, 0.5]).unwrap(), vec![1.0; 3]);
        assert_eq!(bonferroni(&[]).unwrap(), Vec::<f64>::new());
        assert_eq!(bonferroni(&[0.2, 1.5]).unwrap_err(), MetricsError::OutOfRange(1.5));
    }
}
