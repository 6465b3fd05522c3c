//! Style vectors: text → fixed-schema feature vector, per-author
//! standardization, and the distance/similarity primitives used by drift
//! detection and attribution.
//!
//! Schema `law-style-v1` has 65 dimensions:
//!
//! | index  | feature                                            |
//! |--------|----------------------------------------------------|
//! | 0      | mean sentence length (tokens)                      |
//! | 1      | population std of sentence length                  |
//! | 2      | mean word length (letters)                         |
//! | 3      | MATTR, window 500 (plain TTR below 500 tokens)     |
//! | 4      | hapax legomena / tokens                            |
//! | 5      | mean syllables per word                            |
//! | 6      | Flesch Reading Ease                                |
//! | 7–14   | per-1000-token punctuation rates                   |
//! | 15–64  | per-1000-token rates of [`FUNCTION_WORDS`]         |

mod text;
mod vector;

pub use text::{segment, syllable_count, PunctClass, TokenizedText};
pub use vector::{
    cosine, euclidean, extract, fit_standardizer, standardize, Standardizer, StyleVector, FEATURE_NAMES,
    FUNCTION_WORDS, MATTR_WINDOW, SCHEMA_ID, STD_EPSILON, STYLE_DIM,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StyleError {
    #[error("document has no extractable tokens or sentences")]
    EmptyDocument,
    #[error("need at least 2 vectors, got {0}")]
    TooFewVectors(usize),
    #[error("schema mismatch: expected {expected}, got {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}
