//! Deterministic template-based corpus for demos and end-to-end tests.
//!
//! Three authors (`x`, `y`, `z`) write seven documents each, 2017–2023.
//! Every author has a parametric style template. The 2023 document of `x`
//! mixes in sentences from an LLM-style reference manuscript, and that
//! reference is also its fixture; the other 2023 documents get their own
//! LLM-style fixtures but are written purely in the author's style.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::corpus::{Document, Label};

pub const DEFAULT_SEED: u64 = 20230101;
pub const BLENDED_DOC_ID: &str = "x-07";
pub const AUTHORS: [&str; 3] = ["x", "y", "z"];
pub const DOCS_PER_AUTHOR: usize = 7;
const FIRST_YEAR: i32 = 2017;
const BODY_WORDS: usize = 700;
const REFERENCE_WORDS: usize = 900;
/// Share of the blended document's sentences taken from the reference.
const BLEND_SHARE: f64 = 0.8;

/// Sampling parameters for one writing style.
#[derive(Debug, Clone)]
pub struct StyleTemplate {
    pub content_words: &'static [&'static str],
    pub function_words: &'static [(&'static str, u32)],
    /// Probability that a word slot holds a function word.
    pub function_share: f64,
    pub sentence_len: (usize, usize),
    /// Per-word probabilities.
    pub comma: f64,
    pub dash: f64,
    /// Per-sentence probabilities.
    pub semicolon: f64,
    pub colon: f64,
    pub parenthetical: f64,
    pub quote: f64,
    pub question: f64,
    pub exclamation: f64,
}

const AUTHOR_X: StyleTemplate = StyleTemplate {
    content_words: &[
        "cell", "gene", "rat", "dose", "test", "mouse", "blood", "drug", "tumor", "liver", "study", "trial", "group",
        "growth", "protein", "sample", "tissue", "level", "marker", "signal",
    ],
    function_words: &[
        ("the", 10),
        ("of", 6),
        ("in", 6),
        ("a", 5),
        ("was", 5),
        ("with", 3),
        ("and", 4),
        ("we", 4),
        ("to", 3),
        ("by", 2),
        ("were", 3),
        ("on", 2),
        ("no", 1),
    ],
    function_share: 0.42,
    sentence_len: (6, 14),
    comma: 0.04,
    dash: 0.03,
    semicolon: 0.02,
    colon: 0.01,
    parenthetical: 0.25,
    quote: 0.0,
    question: 0.0,
    exclamation: 0.0,
};

const AUTHOR_Y: StyleTemplate = StyleTemplate {
    content_words: &[
        "law", "court", "state", "right", "case", "claim", "judge", "rule", "party", "duty", "power", "statute",
        "contract", "liberty", "order", "public", "doctrine", "harm", "justice", "person",
    ],
    function_words: &[
        ("the", 9),
        ("of", 7),
        ("that", 5),
        ("is", 5),
        ("to", 5),
        ("a", 4),
        ("it", 3),
        ("not", 3),
        ("be", 3),
        ("which", 2),
        ("would", 2),
        ("but", 2),
        ("or", 2),
        ("this", 2),
        ("one", 1),
    ],
    function_share: 0.5,
    sentence_len: (10, 26),
    comma: 0.09,
    dash: 0.005,
    semicolon: 0.12,
    colon: 0.03,
    parenthetical: 0.05,
    quote: 0.2,
    question: 0.08,
    exclamation: 0.0,
};

const AUTHOR_Z: StyleTemplate = StyleTemplate {
    content_words: &[
        "story", "poem", "voice", "reader", "image", "memory", "city", "letter", "novel", "myth", "song", "friend",
        "house", "night", "garden", "mother", "river", "dream", "window", "word",
    ],
    function_words: &[
        ("the", 7),
        ("and", 8),
        ("her", 4),
        ("she", 4),
        ("a", 5),
        ("in", 4),
        ("of", 4),
        ("was", 3),
        ("you", 2),
        ("all", 2),
        ("there", 2),
        ("him", 1),
        ("so", 2),
        ("what", 1),
        ("said", 2),
    ],
    function_share: 0.47,
    sentence_len: (5, 18),
    comma: 0.07,
    dash: 0.04,
    semicolon: 0.01,
    colon: 0.0,
    parenthetical: 0.02,
    quote: 0.3,
    question: 0.1,
    exclamation: 0.05,
};

/// Long, polysyllabic, comma- and colon-heavy prose without asides.
const LLM_STYLE: StyleTemplate = StyleTemplate {
    content_words: &[
        "comprehensive",
        "methodology",
        "significant",
        "framework",
        "innovative",
        "implications",
        "furthermore",
        "additionally",
        "multifaceted",
        "perspective",
        "considerations",
        "potential",
        "understanding",
        "development",
        "integration",
        "organizational",
        "transformative",
        "landscape",
        "particularly",
        "facilitating",
        "contemporary",
        "utilization",
    ],
    function_words: &[
        ("the", 8),
        ("and", 8),
        ("of", 7),
        ("to", 5),
        ("this", 4),
        ("for", 4),
        ("as", 3),
        ("which", 3),
        ("its", 2),
        ("their", 3),
        ("more", 2),
        ("an", 2),
        ("has", 2),
        ("been", 2),
        ("about", 1),
        ("from", 2),
    ],
    function_share: 0.38,
    sentence_len: (20, 34),
    comma: 0.11,
    dash: 0.0,
    semicolon: 0.0,
    colon: 0.35,
    parenthetical: 0.0,
    quote: 0.0,
    question: 0.0,
    exclamation: 0.0,
};

fn template(author: &str) -> &'static StyleTemplate {
    match author {
        "x" => &AUTHOR_X,
        "y" => &AUTHOR_Y,
        _ => &AUTHOR_Z,
    }
}

fn pick_function<'a>(rng: &mut ChaCha8Rng, words: &'a [(&'a str, u32)]) -> &'a str {
    let total: u32 = words.iter().map(|w| w.1).sum();
    let mut r = rng.random_range(0..total);
    for (w, weight) in words {
        if r < *weight {
            return w;
        }
        r -= weight;
    }
    words[words.len() - 1].0
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// One sentence in the template's style, with terminal punctuation.
pub fn sentence(t: &StyleTemplate, rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(t.sentence_len.0..=t.sentence_len.1);
    let colon_at = rng.random_bool(t.colon).then(|| rng.random_range(2..len.max(3)));
    let semi_at = rng.random_bool(t.semicolon).then(|| rng.random_range(2..len.max(3)));
    let paren_at = rng
        .random_bool(t.parenthetical)
        .then(|| rng.random_range(1..len.max(2)));
    let mut out = String::new();
    for i in 0..len {
        let word = if rng.random_bool(t.function_share) {
            pick_function(rng, t.function_words)
        } else {
            t.content_words[rng.random_range(0..t.content_words.len())]
        };
        if i > 0 {
            out.push(' ');
        }
        if paren_at == Some(i) {
            out.push('(');
            out.push_str(word);
            out.push(')');
            continue;
        }
        if i == 0 {
            out.push_str(&capitalize(word));
        } else if rng.random_bool(t.dash) {
            out.push_str(word);
            out.push('-');
            out.push_str(t.content_words[rng.random_range(0..t.content_words.len())]);
        } else {
            out.push_str(word);
        }
        if i + 1 < len {
            if colon_at == Some(i) {
                out.push(':');
            } else if semi_at == Some(i) {
                out.push(';');
            } else if rng.random_bool(t.comma) {
                out.push(',');
            }
        }
    }
    if rng.random_bool(t.quote) {
        out = format!("\"{out}\"");
    }
    let end = if rng.random_bool(t.question) {
        "?"
    } else if rng.random_bool(t.exclamation) {
        "!"
    } else {
        "."
    };
    out.push_str(end);
    out
}

/// Sentences until at least `words` tokens have been written.
fn sentences(t: &StyleTemplate, rng: &mut ChaCha8Rng, words: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut count = 0;
    while count < words {
        let s = sentence(t, rng);
        count += s.split_whitespace().count();
        out.push(s);
    }
    out
}

fn paragraphs(sentences: &[String]) -> String {
    sentences
        .chunks(6)
        .map(|c| c.join(" "))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn title(t: &StyleTemplate, rng: &mut ChaCha8Rng) -> String {
    let w = |rng: &mut ChaCha8Rng| capitalize(t.content_words[rng.random_range(0..t.content_words.len())]);
    format!("On the {} of {} and {}", w(rng), w(rng), w(rng))
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// In (author, year) order.
    pub documents: Vec<Document>,
    /// LLM-style reference manuscripts keyed by doc_id (post-cutoff only).
    pub fixtures: BTreeMap<String, String>,
}

pub fn generate(seed: u64) -> SyntheticCorpus {
    let mut documents = Vec::new();
    let mut fixtures = BTreeMap::new();
    for (a, author) in AUTHORS.iter().enumerate() {
        let t = template(author);
        for i in 0..DOCS_PER_AUTHOR {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((a as u64) << 32 | i as u64));
            let doc_id = format!("{author}-{:02}", i + 1);
            let year = FIRST_YEAR + i as i32;
            let title = title(t, &mut rng);
            let abstract_text = paragraphs(&sentences(t, &mut rng, 60));
            let post_cutoff = i + 1 == DOCS_PER_AUTHOR;
            let own = sentences(t, &mut rng, BODY_WORDS);
            let (body, label) = if post_cutoff {
                let reference = sentences(&LLM_STYLE, &mut rng, REFERENCE_WORDS);
                let fixture = paragraphs(&reference);
                let doc = if doc_id == BLENDED_DOC_ID {
                    let mut mixed = Vec::new();
                    let (mut r, mut o) = (reference.iter(), own.iter());
                    let mut words = 0;
                    while words < BODY_WORDS {
                        let next = if rng.random_bool(BLEND_SHARE) {
                            r.next()
                        } else {
                            o.next()
                        };
                        let Some(s) = next.or_else(|| o.next()) else { break };
                        words += s.split_whitespace().count();
                        mixed.push(s.clone());
                    }
                    (paragraphs(&mixed), Label::LlmAssisted)
                } else {
                    (paragraphs(&own), Label::Human)
                };
                fixtures.insert(doc_id.clone(), fixture);
                doc
            } else {
                (paragraphs(&own), Label::Human)
            };
            documents.push(Document {
                doc_id,
                author_id: author.to_string(),
                year,
                title,
                abstract_text,
                body,
                ground_truth_label: Some(label),
            });
        }
    }
    SyntheticCorpus { documents, fixtures }
}

#[derive(Serialize)]
struct ManifestRecord<'a> {
    doc_id: &'a str,
    author_id: &'a str,
    year: i32,
    title: &'a str,
    #[serde(rename = "abstract")]
    abstract_text: &'a str,
    body_path: String,
    label: Option<Label>,
}

#[derive(Debug, Clone)]
pub struct WrittenCorpus {
    pub manifest: PathBuf,
    pub fixture_dir: PathBuf,
    pub labels: PathBuf,
}

/// Writes `manifest.jsonl` (bodies under `bodies/`), `fixtures/` and
/// `labels.jsonl` into `dir`.
pub fn write_corpus(corpus: &SyntheticCorpus, dir: impl AsRef<Path>) -> io::Result<WrittenCorpus> {
    let dir = dir.as_ref();
    let bodies = dir.join("bodies");
    let fixture_dir = dir.join("fixtures");
    fs::create_dir_all(&bodies)?;
    fs::create_dir_all(&fixture_dir)?;
    let mut manifest = String::new();
    let mut labels = String::new();
    for d in &corpus.documents {
        let rel = format!("bodies/{}.txt", d.doc_id);
        fs::write(dir.join(&rel), &d.body)?;
        let rec = ManifestRecord {
            doc_id: &d.doc_id,
            author_id: &d.author_id,
            year: d.year,
            title: &d.title,
            abstract_text: &d.abstract_text,
            body_path: rel,
            label: d.ground_truth_label,
        };
        manifest.push_str(&serde_json::to_string(&rec).map_err(io::Error::other)?);
        manifest.push('\n');
        if let Some(l) = d.ground_truth_label {
            labels.push_str(&serde_json::json!({"doc_id": d.doc_id, "label": l}).to_string());
            labels.push('\n');
        }
    }
    for (id, text) in &corpus.fixtures {
        fs::write(fixture_dir.join(format!("{id}.txt")), text)?;
    }
    let out = WrittenCorpus {
        manifest: dir.join("manifest.jsonl"),
        fixture_dir,
        labels: dir.join("labels.jsonl"),
    };
    fs::write(&out.manifest, manifest)?;
    fs::write(&out.labels, labels)?;
    Ok(out)
}
