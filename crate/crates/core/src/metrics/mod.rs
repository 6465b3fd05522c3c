//! Evaluation harness: confusion metrics, grid-search threshold tuning,
//! chi-squared machinery, paired tests with Bonferroni correction, and
//! inter-rater agreement.

mod agreement;
mod confusion;
mod report;
mod significance;
mod special;
mod tuning;

pub use agreement::{category_counts, cohens_kappa, fleiss_kappa};
pub use confusion::{confusion, f1_score, metric_set, ConfusionMatrix, MetricSet};
pub use report::{
    evaluate, DetectorReport, MetricReport, OmnibusResult, PairwiseComparison, PairwiseKappa, Predictions,
};
pub use significance::{bonferroni, chi2_homogeneity, mcnemar, ChiSquareTest, McNemar, PairedTest, TestResult};
pub use special::{chi2_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use tuning::{grid_points, objective_value, tune_threshold, Grid, Objective, TuneResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("input is empty")]
    Empty,
    #[error("threshold grid is empty (min {min}, max {max}, step {step})")]
    EmptyGrid { min: f64, max: f64, step: f64 },
    #[error("contingency table has a zero marginal")]
    DegenerateTable,
    #[error("p-value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("item {item} has {found} ratings, expected {expected}")]
    RaggedTable { item: usize, expected: u64, found: u64 },
    #[error("need at least 2 ratings per item, got {0}")]
    TooFewRaters(u64),
    #[error("detector {detector} has no prediction for {doc_id}")]
    MissingPrediction { detector: String, doc_id: String },
}
