use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

use super::text::{segment, syllable_count, PunctClass, TokenizedText};
use super::StyleError;

pub const SCHEMA_ID: &str = "law-style-v1";
pub const STYLE_DIM: usize = 65;
pub const MATTR_WINDOW: usize = 500;
/// Training-set standard deviations below this are treated as zero.
pub const STD_EPSILON: f64 = 1e-12;

pub const FUNCTION_WORDS: [&str; 50] = [
    "the", "of", "and", "to", "in", "a", "is", "that", "for", "it", "as", "with", "was", "be", "by", "on", "not",
    "this", "but", "from", "or", "have", "an", "they", "which", "one", "you", "were", "her", "all", "she", "there",
    "would", "their", "we", "him", "been", "has", "when", "who", "will", "more", "no", "if", "out", "so", "said",
    "what", "its", "about",
];

pub const FEATURE_NAMES: [&str; 15] = [
    "mean_sentence_length",
    "std_sentence_length",
    "mean_word_length",
    "mattr_500",
    "hapax_rate",
    "mean_syllables",
    "flesch_reading_ease",
    "comma_rate",
    "semicolon_rate",
    "colon_rate",
    "question_rate",
    "exclamation_rate",
    "parenthesis_rate",
    "double_quote_rate",
    "dash_rate",
];

const FUNCTION_WORD_OFFSET: usize = 15;

/// A style vector tagged with the schema it was produced under.
///
/// The same type carries raw feature values and standardized (z-space)
/// values; which one a vector holds is determined by where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleVector {
    pub schema_id: String,
    pub values: Vec<f64>,
}

impl StyleVector {
    pub fn new(schema_id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            schema_id: schema_id.into(),
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn zeros_like(&self) -> Self {
        Self::new(self.schema_id.clone(), vec![0.0; self.dim()])
    }

    fn check_schema(&self, expected: &str) -> Result<(), StyleError> {
        if self.schema_id != expected {
            return Err(StyleError::SchemaMismatch {
                expected: expected.to_string(),
                found: self.schema_id.clone(),
            });
        }
        Ok(())
    }
}

fn mattr(tokens: &[&str], window: usize) -> f64 {
    if tokens.len() < window {
        let types: HashSet<&str> = tokens.iter().copied().collect();
        return types.len() as f64 / tokens.len() as f64;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for &t in &tokens[..window] {
        *counts.entry(t).or_default() += 1;
    }
    let mut total = counts.len();
    let mut windows = 1usize;
    for i in window..tokens.len() {
        let out = tokens[i - window];
        let c = counts.get_mut(out).expect("token in window");
        *c -= 1;
        if *c == 0 {
            counts.remove(out);
        }
        *counts.entry(tokens[i]).or_default() += 1;
        total += counts.len();
        windows += 1;
    }
    total as f64 / (windows * window) as f64
}

fn features(t: &TokenizedText) -> Vec<f64> {
    let tokens: Vec<&str> = t.tokens().collect();
    let n_tok = tokens.len() as f64;
    let lengths: Vec<f64> = t.sentences.iter().map(|s| s.len() as f64).collect();
    let n_sent = lengths.len() as f64;

    let mean_len = n_tok / n_sent;
    let var_len = lengths.iter().map(|l| (l - mean_len).powi(2)).sum::<f64>() / n_sent;

    let mut freq: HashMap<&str, usize> = HashMap::new();
    for &tok in &tokens {
        *freq.entry(tok).or_default() += 1;
    }
    let hapax = freq.values().filter(|&&c| c == 1).count() as f64;
    let syllables: usize = tokens.iter().map(|w| syllable_count(w)).sum();
    let syll_per_word = syllables as f64 / n_tok;

    let mut v = Vec::with_capacity(STYLE_DIM);
    v.push(mean_len);
    v.push(var_len.sqrt());
    v.push(t.char_count_of_tokens as f64 / n_tok);
    v.push(mattr(&tokens, MATTR_WINDOW));
    v.push(hapax / n_tok);
    v.push(syll_per_word);
    v.push(206.835 - 1.015 * mean_len - 84.6 * syll_per_word);
    for class in PunctClass::ALL {
        v.push(1000.0 * t.punct(class) as f64 / n_tok);
    }
    for word in FUNCTION_WORDS {
        let c = freq.get(word).copied().unwrap_or(0);
        v.push(1000.0 * c as f64 / n_tok);
    }
    debug_assert_eq!(v.len(), STYLE_DIM);
    debug_assert_eq!(FUNCTION_WORD_OFFSET + FUNCTION_WORDS.len(), STYLE_DIM);
    v
}

/// Raw `law-style-v1` vector of a document body.
pub fn extract(body: &str) -> Result<StyleVector, StyleError> {
    let t = segment(body);
    if t.sentences.is_empty() || t.token_count() == 0 {
        return Err(StyleError::EmptyDocument);
    }
    Ok(StyleVector::new(SCHEMA_ID, features(&t)))
}

/// Per-feature centering and scaling fitted on one author's training window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub schema_id: String,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// `false` where the training spread was below [`STD_EPSILON`]; such
    /// features standardize to exactly 0.
    pub kept_mask: Vec<bool>,
}

impl Standardizer {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn kept_count(&self) -> usize {
        self.kept_mask.iter().filter(|k| **k).count()
    }
}

/// Fits means and sample (m−1) standard deviations over `vectors`.
pub fn fit_standardizer(vectors: &[StyleVector]) -> Result<Standardizer, StyleError> {
    if vectors.len() < 2 {
        return Err(StyleError::TooFewVectors(vectors.len()));
    }
    let schema = vectors[0].schema_id.clone();
    let dim = vectors[0].dim();
    for v in vectors {
        v.check_schema(&schema)?;
        if v.dim() != dim {
            return Err(StyleError::DimensionMismatch {
                left: dim,
                right: v.dim(),
            });
        }
    }
    let m = vectors.len() as f64;
    let mut means = vec![0.0; dim];
    let mut stds = vec![0.0; dim];
    let mut kept_mask = vec![false; dim];
    for j in 0..dim {
        let mean = vectors.iter().map(|v| v.values[j]).sum::<f64>() / m;
        let ss = vectors.iter().map(|v| (v.values[j] - mean).powi(2)).sum::<f64>();
        let std = (ss / (m - 1.0)).sqrt();
        means[j] = mean;
        stds[j] = std;
        kept_mask[j] = std >= STD_EPSILON;
    }
    Ok(Standardizer {
        schema_id: schema,
        means,
        stds,
        kept_mask,
    })
}

/// Maps a raw vector into the standardizer's z-space.
pub fn standardize(s: &Standardizer, v: &StyleVector) -> Result<StyleVector, StyleError> {
    v.check_schema(&s.schema_id)?;
    if v.dim() != s.dim() {
        return Err(StyleError::DimensionMismatch {
            left: s.dim(),
            right: v.dim(),
        });
    }
    let values = v
        .values
        .iter()
        .enumerate()
        .map(|(j, x)| {
            if s.kept_mask[j] {
                (x - s.means[j]) / s.stds[j]
            } else {
                0.0
            }
        })
        .collect();
    Ok(StyleVector::new(s.schema_id.clone(), values))
}

fn check_dims(u: &[f64], v: &[f64]) -> Result<(), StyleError> {
    if u.len() != v.len() {
        return Err(StyleError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(())
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, StyleError> {
    check_dims(u, v)?;
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64, StyleError> {
    check_dims(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}
