//! Attribution of a style anomaly to LLM assistance.
//!
//! For an anomalous document the LLM is asked to write a full manuscript
//! from the document's title and abstract. The document's delta vector is
//! then compared, by cosine similarity in the author's z-space, with the
//! style vector of that reference manuscript.

mod llm;

pub use llm::{
    CachedClient, Completion, FixtureClient, LlmClient, LlmError, ReferenceSource, RetryPolicy, WebClient, WebConfig,
    ENV_API_KEY, ENV_ENDPOINT,
};

pub use crate::drift::ComparisonTarget;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Label};
use crate::drift::{self, AuthorProfile, DriftError};
use crate::stylometry::{self, StyleError, StyleVector};

#[derive(Debug, Error)]
pub enum AttributionError {
    #[error("document has no title")]
    MissingTitle,
    #[error("document has no abstract")]
    MissingAbstract,
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error("document body: {0}")]
    Body(StyleError),
    #[error("reference manuscript: {0}")]
    Reference(StyleError),
    #[error("theta {0} outside [-1, 1]")]
    InvalidTheta(f64),
    #[error("document author {doc_author} does not match profile author {profile_author}")]
    AuthorMismatch { doc_author: String, profile_author: String },
}

impl AttributionError {
    /// Short machine-readable code for failure records.
    pub fn code(&self) -> &'static str {
        match self {
            AttributionError::MissingTitle => "MissingTitle",
            AttributionError::MissingAbstract => "MissingAbstract",
            AttributionError::Llm(e) => e.code(),
            AttributionError::Drift(_) => "Drift",
            AttributionError::Body(_) => "EmptyDocument",
            AttributionError::Reference(_) => "EmptyReference",
            AttributionError::InvalidTheta(_) => "InvalidTheta",
            AttributionError::AuthorMismatch { .. } => "AuthorMismatch",
        }
    }
}

const PROMPT_HEAD: &str = "You are a scholar working on a new academic manuscript. The title of the manuscript is: ";
const PROMPT_MID: &str = ". The abstract of the manuscript is: ";
const PROMPT_TAIL: &str = ". Please write the entire manuscript.";

/// The reference-generation query with title and abstract substituted
/// verbatim.
pub fn build_prompt(title: &str, abstract_text: &str) -> Result<String, AttributionError> {
    if title.is_empty() {
        return Err(AttributionError::MissingTitle);
    }
    if abstract_text.is_empty() {
        return Err(AttributionError::MissingAbstract);
    }
    Ok(format!("{PROMPT_HEAD}{title}{PROMPT_MID}{abstract_text}{PROMPT_TAIL}"))
}

pub fn fetch_reference(client: &dyn LlmClient, doc: &Document) -> Result<Completion, AttributionError> {
    let prompt = build_prompt(&doc.title, &doc.abstract_text)?;
    let completion = client.complete(&doc.doc_id, &prompt)?;
    if completion.text.trim().is_empty() {
        return Err(LlmError::EmptyCompletion.into());
    }
    Ok(completion)
}

/// Cosine between `delta` and the reference text's vector standardized in
/// the author's space.
pub fn similarity(profile: &AuthorProfile, delta: &StyleVector, llm_text: &str) -> Result<f64, AttributionError> {
    let raw = stylometry::extract(llm_text).map_err(AttributionError::Reference)?;
    let z = profile.standardize(&raw)?;
    Ok(stylometry::cosine(&delta.values, &z.values).map_err(DriftError::from)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributionParams {
    pub theta: f64,
    pub k: u32,
    pub comparison_target: ComparisonTarget,
}

impl AttributionParams {
    pub fn new(theta: f64, k: u32, comparison_target: ComparisonTarget) -> Result<Self, AttributionError> {
        if !(-1.0..=1.0).contains(&theta) {
            return Err(AttributionError::InvalidTheta(theta));
        }
        drift::DriftConfig {
            window: drift::DEFAULT_WINDOW,
            k,
        }
        .check()?;
        Ok(Self {
            theta,
            k,
            comparison_target,
        })
    }
}

/// Everything about a document except the θ decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub doc_id: String,
    pub author_id: String,
    pub anomaly_distance: f64,
    pub anomaly_threshold: f64,
    pub anomalous: bool,
    pub similarity: Option<f64>,
    pub reference_source: Option<ReferenceSource>,
}

impl DocumentScore {
    /// Label under threshold `theta`: positive iff anomalous and the
    /// similarity is strictly above `theta`.
    pub fn label(&self, theta: f64) -> Label {
        Label::from_positive(self.anomalous && self.similarity.is_some_and(|s| s > theta))
    }

    pub fn verdict(&self, theta: f64) -> Verdict {
        Verdict {
            doc_id: self.doc_id.clone(),
            author_id: self.author_id.clone(),
            anomaly_distance: self.anomaly_distance,
            anomaly_threshold: self.anomaly_threshold,
            anomalous: self.anomalous,
            similarity: self.similarity,
            theta,
            label: self.label(theta),
            reference_source: self.reference_source,
        }
    }

    /// Score used for θ tuning: the similarity when anomalous, otherwise
    /// −∞ so no threshold can make the document positive.
    pub fn tuning_score(&self) -> f64 {
        match (self.anomalous, self.similarity) {
            (true, Some(s)) => s,
            _ => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub doc_id: String,
    pub author_id: String,
    pub anomaly_distance: f64,
    pub anomaly_threshold: f64,
    pub anomalous: bool,
    pub similarity: Option<f64>,
    pub theta: f64,
    pub label: Label,
    pub reference_source: Option<ReferenceSource>,
}

/// Runs the anomaly test and, only for anomalies, the reference comparison.
pub fn score_document(
    profile: &AuthorProfile,
    doc: &Document,
    client: &dyn LlmClient,
    k: u32,
    target: ComparisonTarget,
) -> Result<DocumentScore, AttributionError> {
    if doc.author_id != profile.author_id {
        return Err(AttributionError::AuthorMismatch {
            doc_author: doc.author_id.clone(),
            profile_author: profile.author_id.clone(),
        });
    }
    let raw = stylometry::extract(&doc.body).map_err(AttributionError::Body)?;
    let distance = drift::anomaly_score(profile, &raw, target)?;
    let anomalous = drift::is_anomalous(profile, distance, k);
    let (similarity, reference_source) = if anomalous {
        let reference = fetch_reference(client, doc)?;
        let delta = drift::delta(profile, &raw)?;
        (
            Some(similarity(profile, &delta, &reference.text)?),
            Some(reference.source),
        )
    } else {
        (None, None)
    };
    Ok(DocumentScore {
        doc_id: doc.doc_id.clone(),
        author_id: doc.author_id.clone(),
        anomaly_distance: distance,
        anomaly_threshold: profile.anomaly_threshold(k),
        anomalous,
        similarity,
        reference_source,
    })
}

pub fn classify(
    profile: &AuthorProfile,
    doc: &Document,
    client: &dyn LlmClient,
    params: &AttributionParams,
) -> Result<Verdict, AttributionError> {
    score_document(profile, doc, client, params.k, params.comparison_target).map(|s| s.verdict(params.theta))
}
