//! Grid search for a score threshold (soft → hard classification).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::confusion::{metric_set, ConfusionMatrix};
use super::MetricsError;
use crate::corpus::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for Grid {
    /// The cosine-similarity range in steps of 0.01.
    fn default() -> Self {
        Self {
            min: -1.0,
            max: 1.0,
            step: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    F1,
    Accuracy,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::F1 => "f1",
            Objective::Accuracy => "accuracy",
        })
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f1" => Ok(Objective::F1),
            "accuracy" => Ok(Objective::Accuracy),
            other => Err(format!("unknown objective \"{other}\" (expected f1 or accuracy)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub theta: f64,
    pub objective: Objective,
    pub value: f64,
}

/// Snaps `x` to the nearest double of its 10-decimal rounding so that grid
/// points print and compare like their decimal spelling (0.79, not
/// 0.7899999999999999).
fn snap(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

/// `min, min+step, …` up to and including `max` (within 1e-9 steps).
pub fn grid_points(grid: &Grid) -> Result<Vec<f64>, MetricsError> {
    let empty = MetricsError::EmptyGrid {
        min: grid.min,
        max: grid.max,
        step: grid.step,
    };
    if grid.step.is_nan() || grid.step <= 0.0 || !grid.min.is_finite() || !grid.max.is_finite() || grid.max < grid.min {
        return Err(empty);
    }
    let count = ((grid.max - grid.min) / grid.step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| snap(grid.min + i as f64 * grid.step)).collect())
}

/// Objective of a confusion matrix; an undefined F1 counts as 0.
pub fn objective_value(cm: &ConfusionMatrix, objective: Objective) -> f64 {
    let m = metric_set(cm);
    match objective {
        Objective::F1 => m.f1.unwrap_or(0.0),
        Objective::Accuracy => m.accuracy.unwrap_or(0.0),
    }
}

/// Evaluates `score > θ` at every grid point and returns the best θ. Ties
/// go to the largest θ, i.e. the fewest positive predictions.
pub fn tune_threshold(
    scores: &[f64],
    labels: &[Label],
    grid: &Grid,
    objective: Objective,
) -> Result<TuneResult, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut best: Option<TuneResult> = None;
    for theta in grid_points(grid)? {
        let mut cm = ConfusionMatrix::default();
        for (&s, &l) in scores.iter().zip(labels) {
            cm.record(l, Label::from_positive(s > theta));
        }
        let value = objective_value(&cm, objective);
        // points ascend, so >= keeps the largest θ among maximizers
        if best.is_none_or(|b| value >= b.value) {
            best = Some(TuneResult {
                theta,
                objective,
                value,
            });
        }
    }
    Ok(best.expect("grid is non-empty"))
}
