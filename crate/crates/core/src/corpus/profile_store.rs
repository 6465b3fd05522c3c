//! On-disk author profiles: one JSON object per author, written atomically.

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::CorpusError;
use crate::drift::AuthorProfile;
use crate::stylometry::{Standardizer, StyleVector};

pub const PROFILE_SCHEMA_VERSION: &str = "law-profile-v1";

/// Serialized form of an [`AuthorProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub schema_version: String,
    pub author_id: String,
    pub feature_schema: String,
    pub window_size: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub kept_mask: Vec<bool>,
    pub avg_change: f64,
    pub std_change: f64,
    pub window_doc_ids: Vec<String>,
    pub last_training_vector: Vec<f64>,
}

impl From<&AuthorProfile> for ProfileFile {
    fn from(p: &AuthorProfile) -> Self {
        Self {
            schema_version: PROFILE_SCHEMA_VERSION.to_string(),
            author_id: p.author_id.clone(),
            feature_schema: p.schema_id.clone(),
            window_size: p.window_size,
            means: p.standardizer.means.clone(),
            stds: p.standardizer.stds.clone(),
            kept_mask: p.standardizer.kept_mask.clone(),
            avg_change: p.avg_change,
            std_change: p.std_change,
            window_doc_ids: p.window_doc_ids.clone(),
            last_training_vector: p.last_training_vector.values.clone(),
        }
    }
}

impl ProfileFile {
    fn into_profile(self, path: &Path) -> Result<AuthorProfile, CorpusError> {
        if self.schema_version != PROFILE_SCHEMA_VERSION {
            return Err(CorpusError::SchemaVersionMismatch {
                found: self.schema_version,
            });
        }
        let dim = self.means.len();
        if self.stds.len() != dim || self.kept_mask.len() != dim || self.last_training_vector.len() != dim {
            return Err(CorpusError::InvalidProfile {
                path: path.to_path_buf(),
                message: "means, stds, kept_mask and last_training_vector differ in length".into(),
            });
        }
        if self.window_doc_ids.len() != self.window_size || self.window_size < 2 {
            return Err(CorpusError::InvalidProfile {
                path: path.to_path_buf(),
                message: format!(
                    "window_size {} does not match {} window_doc_ids",
                    self.window_size,
                    self.window_doc_ids.len()
                ),
            });
        }
        Ok(AuthorProfile {
            author_id: self.author_id,
            standardizer: Standardizer {
                schema_id: self.feature_schema.clone(),
                means: self.means,
                stds: self.stds,
                kept_mask: self.kept_mask,
            },
            avg_change: self.avg_change,
            std_change: self.std_change,
            window_doc_ids: self.window_doc_ids,
            last_training_vector: StyleVector::new(self.feature_schema.clone(), self.last_training_vector),
            window_size: self.window_size,
            schema_id: self.feature_schema,
        })
    }
}

/// File name for an author's profile. Characters outside `[A-Za-z0-9._-]`
/// become `_`; lookups go through the `author_id` stored in the file, so
/// the name is cosmetic.
pub fn profile_file_name(author_id: &str) -> String {
    let safe: String = author_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.profile.json")
}

/// Writes `profile` into `dir` via a temp file and rename.
pub fn store_profile(profile: &AuthorProfile, dir: impl AsRef<Path>) -> Result<PathBuf, CorpusError> {
    let dir = dir.as_ref();
    let io_err = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let target = dir.join(profile_file_name(&profile.author_id));
    let json = serde_json::to_vec_pretty(&ProfileFile::from(profile)).expect("profile serializes");
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(&json).map_err(io_err)?;
    tmp.write_all(b"\n").map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(&target).map_err(|e| io_err(e.error))?;
    Ok(target)
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<AuthorProfile, CorpusError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ProfileFile = serde_json::from_slice(&bytes).map_err(|e| {
        // surface a version mismatch even when the rest of the schema differs
        if let Ok(v) = serde_json::from_slice::<serde_json::Value>(&bytes) {
            if let Some(found) = v.get("schema_version").and_then(|s| s.as_str()) {
                if found != PROFILE_SCHEMA_VERSION {
                    return CorpusError::SchemaVersionMismatch {
                        found: found.to_string(),
                    };
                }
            }
        }
        CorpusError::InvalidProfile {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    })?;
    file.into_profile(path)
}

/// Loads every `*.profile.json` in `dir`, ordered by author_id.
pub fn load_profiles_dir(dir: impl AsRef<Path>) -> Result<Vec<AuthorProfile>, CorpusError> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut profiles = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(".profile.json"))
        {
            profiles.push(load_profile(&path)?);
        }
    }
    profiles.sort_by(|a, b| a.author_id.cmp(&b.author_id));
    Ok(profiles)
}
