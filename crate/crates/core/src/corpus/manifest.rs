//! JSON Lines manifest reader.
//!
//! One object per line with keys `doc_id`, `author_id`, `year`, `title`,
//! `abstract`, exactly one of `body` / `body_path`, and an optional `label`.
//! `body_path` is resolved relative to the manifest's directory. Blank lines
//! are ignored.

use serde::Deserialize;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Corpus, CorpusError, Document, Label, MAX_YEAR, MIN_YEAR};

#[derive(Debug, Deserialize)]
struct Record {
    doc_id: String,
    author_id: String,
    year: i64,
    title: String,
    #[serde(rename = "abstract")]
    abstract_text: String,
    body: Option<String>,
    body_path: Option<String>,
    label: Option<Label>,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&bytes, &base, path)
}

/// Parses manifest bytes; `base_dir` anchors relative `body_path`s and
/// `source` is only used in error messages.
pub fn parse_manifest(bytes: &[u8], base_dir: &Path, source: &Path) -> Result<Corpus, CorpusError> {
    let mut documents = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in bytes.split(|b| *b == b'\n').enumerate() {
        let line = i + 1;
        let text = std::str::from_utf8(raw).map_err(|_| CorpusError::InvalidUtf8 {
            path: source.to_path_buf(),
            line: Some(line),
        })?;
        let text = text.strip_suffix('\r').unwrap_or(text);
        if text.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(text).map_err(|e| CorpusError::MalformedRecord {
            line,
            message: e.to_string(),
        })?;
        let doc = resolve(rec, line, base_dir)?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(CorpusError::DuplicateDocId(doc.doc_id));
        }
        documents.push(doc);
    }
    Corpus::new(documents)
}

fn resolve(rec: Record, line: usize, base_dir: &Path) -> Result<Document, CorpusError> {
    let malformed = |message: &str| CorpusError::MalformedRecord {
        line,
        message: message.to_string(),
    };
    if rec.doc_id.is_empty() {
        return Err(malformed("doc_id must be non-empty"));
    }
    if !(MIN_YEAR as i64..=MAX_YEAR as i64).contains(&rec.year) {
        return Err(CorpusError::MalformedRecord {
            line,
            message: format!("year {} outside [{MIN_YEAR}, {MAX_YEAR}]", rec.year),
        });
    }
    let body = match (rec.body, rec.body_path) {
        (Some(body), None) => body,
        (None, Some(rel)) => {
            let path: PathBuf = base_dir.join(&rel);
            let bytes = fs::read(&path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => CorpusError::MissingBodyFile {
                    line,
                    path: path.clone(),
                },
                _ => CorpusError::Io {
                    path: path.clone(),
                    source: e,
                },
            })?;
            String::from_utf8(bytes).map_err(|_| CorpusError::InvalidUtf8 { path, line: None })?
        }
        (Some(_), Some(_)) => return Err(malformed("record has both `body` and `body_path`")),
        (None, None) => return Err(malformed("record needs one of `body` or `body_path`")),
    };
    Ok(Document {
        doc_id: rec.doc_id,
        author_id: rec.author_id,
        year: rec.year as i32,
        title: rec.title,
        abstract_text: rec.abstract_text,
        body,
        ground_truth_label: rec.label,
    })
}
