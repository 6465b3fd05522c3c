//! Writing-style drift detector for LLM-assisted scientific writing.
//!
//! The pipeline models how an author's style moves from one publication to
//! the next over a window of pre-cutoff documents, flags a newer document
//! whose style jumps further than the author's usual drift, and attributes
//! the jump to LLM assistance when the direction of the change lines up with
//! the style of an LLM-written manuscript generated from the same title and
//! abstract.
//!
//! Modules:
//!
//! - [`corpus`]: JSON Lines manifests, validation, training windows, profile files.
//! - [`stylometry`]: tokenization and the 65-dimensional `law-style-v1` style vector.
//! - [`drift`]: author profiles, anomaly scores and delta vectors.
//! - [`attribution`]: reference-manuscript prompt, LLM backends, verdicts.
//! - [`metrics`]: confusion metrics, threshold tuning, significance tests, agreement.
//! - [`synthetic`]: deterministic template-based corpus generator used by demos and tests.

pub mod attribution;
pub mod corpus;
pub mod drift;
pub mod metrics;
pub mod stylometry;
pub mod synthetic;

pub use attribution::{AttributionParams, ComparisonTarget, LlmClient, Verdict};
pub use corpus::{Corpus, Document, Label};
pub use drift::{AuthorProfile, DriftConfig};
pub use stylometry::{Standardizer, StyleVector};
