//! Multi-detector evaluation report: per-detector metrics, an omnibus
//! chi-squared test on correct/incorrect counts, Bonferroni-corrected
//! paired tests, and agreement statistics.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::agreement::{category_counts, cohens_kappa, fleiss_kappa};
use super::confusion::{metric_set, ConfusionMatrix, MetricSet};
use super::significance::{bonferroni, chi2_homogeneity, ChiSquareTest, PairedTest};
use super::tuning::{tune_threshold, Grid, Objective, TuneResult};
use super::MetricsError;
use crate::corpus::Label;

/// One detector's output keyed by doc_id.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Labels(BTreeMap<String, Label>),
    /// Soft scores; converted to labels with a tuned threshold.
    Scores(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<TuneResult>,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmnibusResult {
    /// Rows: correct, incorrect; one column per detector.
    pub table: Vec<Vec<u64>>,
    #[serde(flatten)]
    pub test: ChiSquareTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    /// Items `a` got right and `b` got wrong.
    pub a_only_correct: u64,
    /// Items `b` got right and `a` got wrong.
    pub b_only_correct: u64,
    pub statistic: f64,
    pub p_value: f64,
    pub p_bonferroni: f64,
    /// "p-value(statistic)" with the corrected p, e.g. `< 0.01(34.21)`.
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseKappa {
    pub a: String,
    pub b: String,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub items: usize,
    pub positives: usize,
    pub detectors: Vec<DetectorReport>,
    pub omnibus: Option<OmnibusResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omnibus_note: Option<String>,
    pub pairwise_test: String,
    pub pairwise: Vec<PairwiseComparison>,
    pub fleiss_kappa: Option<f64>,
    pub cohens_kappa: Vec<PairwiseKappa>,
}

fn display_p(p: f64, statistic: f64) -> String {
    if p < 0.01 {
        format!("< 0.01({statistic:.2})")
    } else {
        format!("{p:.2}({statistic:.2})")
    }
}

/// Scores every detector against `truth` over all of truth's documents.
pub fn evaluate(
    truth: &BTreeMap<String, Label>,
    detectors: &[(String, Predictions)],
    grid: &Grid,
    objective: Objective,
    paired: &dyn PairedTest,
) -> Result<MetricReport, MetricsError> {
    if truth.is_empty() {
        return Err(MetricsError::Empty);
    }
    let ids: Vec<&String> = truth.keys().collect();
    let labels: Vec<Label> = truth.values().copied().collect();

    let mut reports = Vec::with_capacity(detectors.len());
    let mut hard: Vec<Vec<Label>> = Vec::with_capacity(detectors.len());
    for (name, preds) in detectors {
        let missing = |doc_id: &str| MetricsError::MissingPrediction {
            detector: name.clone(),
            doc_id: doc_id.to_string(),
        };
        let (threshold, predicted) = match preds {
            Predictions::Labels(map) => {
                let p = ids.iter().map(|id| map.get(*id).copied().ok_or_else(|| missing(id)));
                (None, p.collect::<Result<Vec<_>, _>>()?)
            }
            Predictions::Scores(map) => {
                let scores = ids
                    .iter()
                    .map(|id| map.get(*id).copied().ok_or_else(|| missing(id)))
                    .collect::<Result<Vec<_>, _>>()?;
                let tuned = tune_threshold(&scores, &labels, grid, objective)?;
                let p = scores.iter().map(|&s| Label::from_positive(s > tuned.theta)).collect();
                (Some(tuned), p)
            }
        };
        let mut cm = ConfusionMatrix::default();
        for (&t, &p) in labels.iter().zip(&predicted) {
            cm.record(t, p);
        }
        reports.push(DetectorReport {
            name: name.clone(),
            threshold,
            confusion: cm,
            metrics: metric_set(&cm),
        });
        hard.push(predicted);
    }

    let correct: Vec<Vec<bool>> = hard
        .iter()
        .map(|p| p.iter().zip(&labels).map(|(a, b)| a == b).collect())
        .collect();

    let (omnibus, omnibus_note) = if detectors.len() < 2 {
        (None, Some("omnibus test needs at least two detectors".to_string()))
    } else {
        let right: Vec<u64> = correct
            .iter()
            .map(|c| c.iter().filter(|x| **x).count() as u64)
            .collect();
        let wrong: Vec<u64> = right.iter().map(|r| labels.len() as u64 - r).collect();
        let table = vec![right, wrong];
        match chi2_homogeneity(&table) {
            Ok(test) => (Some(OmnibusResult { table, test }), None),
            Err(MetricsError::DegenerateTable) => (None, Some("contingency table has a zero marginal".to_string())),
            Err(e) => return Err(e),
        }
    };

    let mut pairs = Vec::new();
    for i in 0..detectors.len() {
        for j in i + 1..detectors.len() {
            let b = correct[i].iter().zip(&correct[j]).filter(|(x, y)| **x && !**y).count() as u64;
            let c = correct[i].iter().zip(&correct[j]).filter(|(x, y)| !**x && **y).count() as u64;
            pairs.push((i, j, b, c, paired.test(b, c)));
        }
    }
    let adjusted = bonferroni(&pairs.iter().map(|p| p.4.p_value).collect::<Vec<_>>())?;
    let pairwise = pairs
        .iter()
        .zip(adjusted)
        .map(|(&(i, j, b, c, t), adj)| PairwiseComparison {
            a: detectors[i].0.clone(),
            b: detectors[j].0.clone(),
            a_only_correct: b,
            b_only_correct: c,
            statistic: t.statistic,
            p_value: t.p_value,
            p_bonferroni: adj,
            display: display_p(adj, t.statistic),
        })
        .collect();

    let fleiss = if detectors.len() >= 2 {
        let ratings: Vec<Vec<Label>> = (0..labels.len()).map(|k| hard.iter().map(|h| h[k]).collect()).collect();
        let (_, mut table) = category_counts(&ratings);
        if table.first().is_some_and(|r| r.len() == 1) {
            // single observed category: add the empty one so P_e is well defined
            for r in &mut table {
                r.push(0);
            }
        }
        Some(fleiss_kappa(&table)?)
    } else {
        None
    };
    let mut kappas = Vec::new();
    for i in 0..detectors.len() {
        for j in i + 1..detectors.len() {
            kappas.push(PairwiseKappa {
                a: detectors[i].0.clone(),
                b: detectors[j].0.clone(),
                kappa: cohens_kappa(&hard[i], &hard[j])?,
            });
        }
    }

    Ok(MetricReport {
        items: labels.len(),
        positives: labels.iter().filter(|l| l.is_positive()).count(),
        detectors: reports,
        omnibus,
        omnibus_note,
        pairwise_test: paired.name().to_string(),
        pairwise,
        fleiss_kappa: fleiss,
        cohens_kappa: kappas,
    })
}
