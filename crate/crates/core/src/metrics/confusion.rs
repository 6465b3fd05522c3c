use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, truth: Label, pred: Label) {
        match (truth.is_positive(), pred.is_positive()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }
}

/// Counts with `llm_assisted` as the positive class.
pub fn confusion(labels: &[Label], preds: &[Label]) -> Result<ConfusionMatrix, MetricsError> {
    if labels.len() != preds.len() {
        return Err(MetricsError::LengthMismatch {
            left: labels.len(),
            right: preds.len(),
        });
    }
    if labels.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in labels.iter().zip(preds) {
        cm.record(t, p);
    }
    Ok(cm)
}

/// Derived metrics; `None` marks a 0/0 ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metric_set(cm: &ConfusionMatrix) -> MetricSet {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    // 2PR/(P+R) == 2tp/(2tp+fp+fn); the count form is exact for equal ratios
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_),
        _ => None,
    };
    MetricSet {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision,
        recall,
        f1,
        fpr: ratio(cm.fp, cm.fp + cm.tn),
    }
}

/// Harmonic mean of precision and recall.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    (precision + recall > 0.0).then(|| 2.0 * precision * recall / (precision + recall))
}
