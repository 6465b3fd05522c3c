//! Author writing-style dynamics: the mean and spread of publication-to-
//! publication style change over a training window, the anomaly rule for a
//! new document, and the delta vector handed to attribution.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::corpus::Document;
use crate::stylometry::{self, Standardizer, StyleError, StyleVector};

pub const DEFAULT_WINDOW: usize = 6;
pub const DEFAULT_K: u32 = 1;
pub const MIN_WINDOW: usize = 2;
pub const MAX_WINDOW: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriftError {
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error("document {doc_id}: {source}")]
    Extract {
        doc_id: String,
        #[source]
        source: StyleError,
    },
    #[error("training window has {found} documents, config expects {expected}")]
    WindowSize { expected: usize, found: usize },
    #[error("training window mixes authors {0} and {1}")]
    MixedAuthors(String, String),
    #[error("training window is not in ascending (year, doc_id) order at {0}")]
    Unordered(String),
    #[error("invalid drift config: {0}")]
    InvalidConfig(String),
}

/// What a new document's style is measured against when scoring anomalies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonTarget {
    /// The newest training document: the same kind of step that the
    /// training changes measure.
    #[default]
    Last,
    /// The centroid of the training window (the z-space origin).
    Centroid,
}

impl fmt::Display for ComparisonTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComparisonTarget::Last => "last",
            ComparisonTarget::Centroid => "centroid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftConfig {
    pub window: usize,
    /// Multiplier on the change spread in the anomaly threshold.
    pub k: u32,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            k: DEFAULT_K,
        }
    }
}

impl DriftConfig {
    pub fn new(window: usize, k: u32) -> Result<Self, DriftError> {
        let cfg = Self { window, k };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), DriftError> {
        if !(MIN_WINDOW..=MAX_WINDOW).contains(&self.window) {
            return Err(DriftError::InvalidConfig(format!(
                "window {} outside [{MIN_WINDOW}, {MAX_WINDOW}]",
                self.window
            )));
        }
        if !(1..=3).contains(&self.k) {
            return Err(DriftError::InvalidConfig(format!("k {} not in {{1, 2, 3}}", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author_id: String,
    pub standardizer: Standardizer,
    /// Mean consecutive style change over the window.
    pub avg_change: f64,
    /// Sample standard deviation of the consecutive changes.
    pub std_change: f64,
    /// Training documents, oldest first.
    pub window_doc_ids: Vec<String>,
    /// z-space vector of the newest training document.
    pub last_training_vector: StyleVector,
    pub window_size: usize,
    pub schema_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftWarning {
    /// The change spread is zero, either because the window has a single
    /// transition or because every transition is identical.
    DegenerateSpread,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedProfile {
    pub profile: AuthorProfile,
    pub warnings: Vec<DriftWarning>,
}

/// Euclidean distances between successive vectors.
pub fn consecutive_changes(zvecs: &[StyleVector]) -> Result<Vec<f64>, DriftError> {
    if zvecs.len() < 2 {
        return Err(StyleError::TooFewVectors(zvecs.len()).into());
    }
    zvecs
        .windows(2)
        .map(|w| stylometry::euclidean(&w[0].values, &w[1].values).map_err(Into::into))
        .collect()
}

/// Mean and sample standard deviation of `changes`; the spread of a single
/// change is defined as 0.
pub fn change_statistics(changes: &[f64]) -> (f64, f64) {
    let m = changes.len() as f64;
    let avg = changes.iter().sum::<f64>() / m;
    if changes.len() < 2 {
        return (avg, 0.0);
    }
    let ss = changes.iter().map(|c| (c - avg).powi(2)).sum::<f64>();
    (avg, (ss / (m - 1.0)).sqrt())
}

/// Fits a profile from training documents ordered oldest first.
pub fn fit_profile(docs: &[&Document], cfg: &DriftConfig) -> Result<FittedProfile, DriftError> {
    cfg.check()?;
    if docs.len() != cfg.window {
        return Err(DriftError::WindowSize {
            expected: cfg.window,
            found: docs.len(),
        });
    }
    let author = &docs[0].author_id;
    for pair in docs.windows(2) {
        if pair[1].author_id != *author {
            return Err(DriftError::MixedAuthors(author.clone(), pair[1].author_id.clone()));
        }
        if (pair[0].year, &pair[0].doc_id) > (pair[1].year, &pair[1].doc_id) {
            return Err(DriftError::Unordered(pair[1].doc_id.clone()));
        }
    }
    let raw = docs
        .iter()
        .map(|d| {
            stylometry::extract(&d.body).map_err(|source| DriftError::Extract {
                doc_id: d.doc_id.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ids = docs.iter().map(|d| d.doc_id.clone()).collect();
    fit_profile_from_vectors(author, ids, &raw)
}

/// Fits a profile from raw vectors already extracted (oldest first).
pub fn fit_profile_from_vectors(
    author_id: &str,
    window_doc_ids: Vec<String>,
    raw: &[StyleVector],
) -> Result<FittedProfile, DriftError> {
    if window_doc_ids.len() != raw.len() {
        return Err(DriftError::WindowSize {
            expected: raw.len(),
            found: window_doc_ids.len(),
        });
    }
    let standardizer = stylometry::fit_standardizer(raw)?;
    let zvecs = raw
        .iter()
        .map(|v| stylometry::standardize(&standardizer, v))
        .collect::<Result<Vec<_>, _>>()?;
    let changes = consecutive_changes(&zvecs)?;
    let (avg_change, std_change) = change_statistics(&changes);
    let mut warnings = Vec::new();
    if std_change == 0.0 {
        warnings.push(DriftWarning::DegenerateSpread);
    }
    let schema_id = standardizer.schema_id.clone();
    let profile = AuthorProfile {
        author_id: author_id.to_string(),
        standardizer,
        avg_change,
        std_change,
        window_size: window_doc_ids.len(),
        window_doc_ids,
        last_training_vector: zvecs.last().cloned().expect("at least two vectors"),
        schema_id,
    };
    Ok(FittedProfile { profile, warnings })
}

impl AuthorProfile {
    pub fn standardize(&self, raw: &StyleVector) -> Result<StyleVector, DriftError> {
        Ok(stylometry::standardize(&self.standardizer, raw)?)
    }

    /// `avg_change + k · std_change`.
    pub fn anomaly_threshold(&self, k: u32) -> f64 {
        self.avg_change + k as f64 * self.std_change
    }
}

/// Distance of a new document from the author's style in z-space.
pub fn anomaly_score(
    profile: &AuthorProfile,
    new_doc_raw: &StyleVector,
    target: ComparisonTarget,
) -> Result<f64, DriftError> {
    let z = profile.standardize(new_doc_raw)?;
    let d = match target {
        ComparisonTarget::Last => stylometry::euclidean(&z.values, &profile.last_training_vector.values)?,
        ComparisonTarget::Centroid => z.values.iter().map(|x| x * x).sum::<f64>().sqrt(),
    };
    Ok(d)
}

/// Inclusive threshold test with a strict-positivity guard, so that an exact
/// clone of the history is never anomalous even when the history has no
/// spread at all.
pub fn is_anomalous(profile: &AuthorProfile, distance: f64, k: u32) -> bool {
    distance > 0.0 && distance >= profile.anomaly_threshold(k)
}

/// Difference between the new document and the training centroid in z-space.
///
/// The standardizer centers every kept feature on the training mean and
/// zeroes dropped ones, so the centroid is the origin and the delta is the
/// standardized vector itself.
pub fn delta(profile: &AuthorProfile, new_doc_raw: &StyleVector) -> Result<StyleVector, DriftError> {
    profile.standardize(new_doc_raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(values: &[f64]) -> StyleVector {
        StyleVector::new("test", values.to_vec())
    }

    fn one_dim_profile(avg: f64, std: f64, last: f64) -> AuthorProfile {
        AuthorProfile {
            author_id: "a".into(),
            standardizer: Standardizer {
                schema_id: "test".into(),
                means: vec![0.0],
                stds: vec![1.0],
                kept_mask: vec![true],
            },
            avg_change: avg,
            std_change: std,
            window_doc_ids: vec!["d1".into(), "d2".into()],
            last_training_vector: sv(&[last]),
            window_size: 2,
            schema_id: "test".into(),
        }
    }

    #[test]
    fn changes_in_one_dim() {
        let c = consecutive_changes(&[sv(&[0.0]), sv(&[1.0]), sv(&[3.0])]).unwrap();
        assert_eq!(c, vec![1.0, 2.0]);
    }

    #[test]
    fn identical_vectors_have_zero_change() {
        let v = vec![sv(&[0.4, -1.0]); 4];
        assert_eq!(consecutive_changes(&v).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn six_vectors_five_changes() {
        let v: Vec<_> = (0..6).map(|i| sv(&[i as f64])).collect();
        assert_eq!(consecutive_changes(&v).unwrap().len(), 5);
        assert!(consecutive_changes(&v[..1]).is_err());
    }

    #[test]
    fn change_stats_hand_values() {
        let (avg, std) = change_statistics(&[0.1, 0.3]);
        assert!((avg - 0.2).abs() < 1e-15);
        assert!((std - 0.1414213562).abs() < 1e-9);
        assert_eq!(change_statistics(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn anomaly_score_one_dim() {
        let p = one_dim_profile(0.2, 0.1, 0.5);
        let d = anomaly_score(&p, &sv(&[0.9]), ComparisonTarget::Last).unwrap();
        assert!((d - 0.4).abs() < 1e-15);
        let c = anomaly_score(&p, &sv(&[0.9]), ComparisonTarget::Centroid).unwrap();
        assert!((c - 0.9).abs() < 1e-15);
    }

    #[test]
    fn anomaly_rule() {
        let p = one_dim_profile(0.2, 0.1, 0.0);
        assert!(is_anomalous(&p, 0.35, 1));
        assert!(!is_anomalous(&p, 0.25, 1));
        assert!(!is_anomalous(&p, 0.35, 2));
        // inclusive bound
        let q = one_dim_profile(0.25, 0.25, 0.0);
        assert!(is_anomalous(&q, 0.5, 1));
        let flat = one_dim_profile(0.0, 0.0, 0.0);
        assert!(!is_anomalous(&flat, 0.0, 1));
        assert!(is_anomalous(&flat, 1e-9, 1));
    }

    #[test]
    fn config_ranges() {
        assert!(DriftConfig::new(6, 1).is_ok());
        assert!(DriftConfig::new(1, 1).is_err());
        assert!(DriftConfig::new(11, 1).is_err());
        assert!(DriftConfig::new(6, 4).is_err());
        assert!(DriftConfig::new(6, 0).is_err());
    }

    #[test]
    fn score_ignores_dropped_features() {
        let raw = vec![sv(&[1.0, 5.0]), sv(&[2.0, 5.0]), sv(&[4.0, 5.0])];
        let fit = fit_profile_from_vectors("a", vec!["x".into(), "y".into(), "z".into()], &raw).unwrap();
        let p = fit.profile;
        assert_eq!(p.standardizer.kept_mask, vec![true, false]);
        let a = anomaly_score(&p, &sv(&[3.0, 5.0]), ComparisonTarget::Last).unwrap();
        let b = anomaly_score(&p, &sv(&[3.0, -400.0]), ComparisonTarget::Last).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn delta_of_means_is_zero() {
        let raw = vec![sv(&[1.0, 10.0]), sv(&[2.0, 14.0]), sv(&[6.0, 11.0])];
        let p = fit_profile_from_vectors("a", vec!["x".into(), "y".into(), "z".into()], &raw)
            .unwrap()
            .profile;
        let means = sv(&p.standardizer.means.clone());
        assert_eq!(delta(&p, &means).unwrap().values, vec![0.0, 0.0]);
        assert_eq!(delta(&p, &raw[2]).unwrap(), p.last_training_vector);
    }
}
