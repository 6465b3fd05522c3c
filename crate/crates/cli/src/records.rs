//! JSON Lines inputs and outputs of the CLI.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use law_core::attribution::Verdict;
use law_core::metrics::Predictions;
use law_core::Label;

/// Malformed labels or predictions file.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub(crate) fn invalid(msg: String) -> anyhow::Error {
    InvalidInput(msg).into()
}

#[derive(Debug, Deserialize)]
struct Row {
    doc_id: String,
    #[serde(default)]
    label: Option<Label>,
    #[serde(default)]
    score: Option<f64>,
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(line)
            .map_err(|e| invalid(format!("{}: line {}: malformed record: {e}", path.display(), i + 1)))?;
        if !seen.insert(row.doc_id.clone()) {
            return Err(invalid(format!(
                "{}: line {}: duplicate doc_id \"{}\"",
                path.display(),
                i + 1,
                row.doc_id
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Ground truth labels plus any scores embedded alongside them.
pub struct LabelFile {
    pub labels: BTreeMap<String, Label>,
    pub scores: BTreeMap<String, f64>,
}

pub fn read_labels(path: &Path) -> Result<LabelFile> {
    let mut labels = BTreeMap::new();
    let mut scores = BTreeMap::new();
    for row in read_rows(path)? {
        let label = row
            .label
            .ok_or_else(|| invalid(format!("{}: record {} has no label", path.display(), row.doc_id)))?;
        if let Some(s) = row.score {
            scores.insert(row.doc_id.clone(), s);
        }
        labels.insert(row.doc_id, label);
    }
    Ok(LabelFile { labels, scores })
}

/// A detector output file: all records carry `score`, or all carry `label`.
pub fn read_predictions(path: &Path) -> Result<Predictions> {
    let rows = read_rows(path)?;
    if !rows.is_empty() && rows.iter().all(|r| r.score.is_some()) {
        return Ok(Predictions::Scores(
            rows.into_iter().map(|r| (r.doc_id, r.score.unwrap())).collect(),
        ));
    }
    let mut labels = BTreeMap::new();
    for r in rows {
        let l = r.label.ok_or_else(|| {
            invalid(format!(
                "{}: record {} has neither a score nor a label",
                path.display(),
                r.doc_id
            ))
        })?;
        labels.insert(r.doc_id, l);
    }
    Ok(Predictions::Labels(labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureInfo {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub doc_id: String,
    pub author_id: String,
    pub failure: FailureInfo,
}

/// One line of the verdict report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportRecord {
    Verdict(Verdict),
    Failure(FailureRecord),
}

impl ReportRecord {
    pub fn doc_id(&self) -> &str {
        match self {
            ReportRecord::Verdict(v) => &v.doc_id,
            ReportRecord::Failure(f) => &f.doc_id,
        }
    }
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
