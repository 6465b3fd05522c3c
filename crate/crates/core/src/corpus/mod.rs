//! Document manifests, corpus validation, training-window selection, and
//! author profile files.

mod manifest;
mod profile_store;

pub use manifest::{load_manifest, parse_manifest};
pub use profile_store::{
    load_profile, load_profiles_dir, profile_file_name, store_profile, ProfileFile, PROFILE_SCHEMA_VERSION,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

pub const DEFAULT_CUTOFF_YEAR: i32 = 2022;
pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    LlmAssisted,
    Human,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::LlmAssisted
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::LlmAssisted
        } else {
            Label::Human
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::LlmAssisted => "llm_assisted",
            Label::Human => "human",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub author_id: String,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub body: String,
    #[serde(default, rename = "label", skip_serializing_if = "Option::is_none")]
    pub ground_truth_label: Option<Label>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("duplicate doc_id \"{0}\"")]
    DuplicateDocId(String),
    #[error("line {line}: body file not found: {path}")]
    MissingBodyFile { line: usize, path: PathBuf },
    #[error("{path}: content is not valid UTF-8{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    InvalidUtf8 { path: PathBuf, line: Option<usize> },
    #[error("author {author_id}: insufficient history: needed {needed}, found {found}")]
    InsufficientHistory {
        author_id: String,
        needed: usize,
        found: usize,
    },
    #[error("unsupported profile schema version \"{found}\" (expected \"{PROFILE_SCHEMA_VERSION}\")")]
    SchemaVersionMismatch { found: String },
    #[error("{path}: invalid profile: {message}")]
    InvalidProfile { path: PathBuf, message: String },
    #[error("window must be at least 2, got {0}")]
    InvalidWindow(usize),
}

/// Immutable, doc_id-ordered collection of documents.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    by_id: BTreeMap<String, usize>,
    by_author: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn new(mut documents: Vec<Document>) -> Result<Self, CorpusError> {
        documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        let mut by_id = BTreeMap::new();
        let mut by_author: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, d) in documents.iter().enumerate() {
            if by_id.insert(d.doc_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateDocId(d.doc_id.clone()));
            }
            by_author.entry(d.author_id.clone()).or_default().push(i);
        }
        Ok(Self {
            documents,
            by_id,
            by_author,
        })
    }

    /// Documents in ascending doc_id order.
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.documents[i])
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.by_author.keys().map(String::as_str)
    }

    pub fn by_author<'a>(&'a self, author_id: &str) -> impl Iterator<Item = &'a Document> + 'a {
        self.by_author
            .get(author_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.documents[i])
    }

    /// Documents published strictly after `cutoff_year`, in doc_id order.
    pub fn post_cutoff(&self, cutoff_year: i32) -> impl Iterator<Item = &Document> {
        self.documents.iter().filter(move |d| d.year > cutoff_year)
    }
}

/// The `n` most recent documents of `author_id` with `year <= cutoff_year`,
/// ascending by `(year, doc_id)`.
pub fn training_window<'a>(
    corpus: &'a Corpus,
    author_id: &str,
    cutoff_year: i32,
    n: usize,
) -> Result<Vec<&'a Document>, CorpusError> {
    let mut eligible: Vec<&Document> = corpus.by_author(author_id).filter(|d| d.year <= cutoff_year).collect();
    if eligible.len() < n {
        return Err(CorpusError::InsufficientHistory {
            author_id: author_id.to_string(),
            needed: n,
            found: eligible.len(),
        });
    }
    eligible.sort_by(|a, b| (a.year, &a.doc_id).cmp(&(b.year, &b.doc_id)));
    Ok(eligible.split_off(eligible.len() - n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCode {
    EmptyBody,
    MissingTitle,
    MissingAbstract,
    InsufficientHistory,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::EmptyBody => "EmptyBody",
            IssueCode::MissingTitle => "MissingTitle",
            IssueCode::MissingAbstract => "MissingAbstract",
            IssueCode::InsufficientHistory => "InsufficientHistory",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    /// doc_id for document issues, author_id for author issues.
    pub subject: String,
    pub code: IssueCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
    pub counts: BTreeMap<String, usize>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    fn push(&mut self, error: bool, subject: &str, code: IssueCode, message: String) {
        *self.counts.entry(code.as_str().to_string()).or_default() += 1;
        let issue = Issue {
            subject: subject.to_string(),
            code,
            message,
        };
        if error {
            self.errors.push(issue);
        } else {
            self.warnings.push(issue);
        }
    }
}

/// Checks every document and author against the pipeline's preconditions.
///
/// Content problems are reported, never raised. Bodies without any
/// extractable sentence count as empty.
pub fn validate(corpus: &Corpus, cutoff_year: i32, window: usize) -> Result<ValidationReport, CorpusError> {
    if window < 2 {
        return Err(CorpusError::InvalidWindow(window));
    }
    let mut report = ValidationReport::default();
    for d in corpus.documents() {
        if crate::stylometry::extract(&d.body).is_err() {
            report.push(
                true,
                &d.doc_id,
                IssueCode::EmptyBody,
                "body has no extractable text".into(),
            );
        }
        if d.year > cutoff_year {
            if d.title.is_empty() {
                report.push(
                    true,
                    &d.doc_id,
                    IssueCode::MissingTitle,
                    "post-cutoff document needs a title for the reference prompt".into(),
                );
            }
            if d.abstract_text.is_empty() {
                report.push(
                    true,
                    &d.doc_id,
                    IssueCode::MissingAbstract,
                    "post-cutoff document needs an abstract for the reference prompt".into(),
                );
            }
        }
    }
    for author in corpus.authors() {
        let found = corpus.by_author(author).filter(|d| d.year <= cutoff_year).count();
        if found < window {
            report.push(
                false,
                author,
                IssueCode::InsufficientHistory,
                format!("{found} documents in or before {cutoff_year}, window needs {window}"),
            );
        }
    }
    Ok(report)
}
