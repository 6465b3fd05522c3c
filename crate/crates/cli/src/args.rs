use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use law_core::corpus::DEFAULT_CUTOFF_YEAR;
use law_core::drift::{ComparisonTarget, DEFAULT_K, DEFAULT_WINDOW};
use law_core::metrics::{Grid, Objective};

#[derive(Debug, Parser)]
#[command(
    name = "law",
    version,
    about = "Detect LLM-assisted writing from abrupt writing-style changes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a manifest against the pipeline's preconditions
    Validate {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Also write the report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fit and store one profile per eligible author
    Profile {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        profiles_dir: PathBuf,
    },
    /// Generate and cache LLM reference manuscripts through the web backend
    Genref {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        decision: AnomalyArgs,
        #[arg(long)]
        profiles_dir: Option<PathBuf>,
        /// Cache directory; one `<doc_id>.txt` per reference
        #[arg(long)]
        fixture_dir: PathBuf,
        #[arg(long)]
        model: String,
        /// Generate for every post-cutoff document, not only anomalous ones
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 4)]
        parallel: usize,
    },
    /// Classify every post-cutoff document and write a verdict report
    Detect {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        decision: AnomalyArgs,
        /// Similarity threshold; a document is LLM-assisted when its
        /// similarity is strictly above it
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        profiles_dir: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
        /// Verdict report (JSON Lines, ordered by doc_id)
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Tune a decision threshold by grid search
    Tune {
        /// Run the detector over this manifest and tune θ on its labels
        #[command(flatten)]
        corpus: OptionalCorpusArgs,
        #[command(flatten)]
        decision: AnomalyArgs,
        #[arg(long)]
        profiles_dir: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
        /// Ground truth (JSON Lines `{doc_id, label, score?}`)
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Scores (JSON Lines `{doc_id, score}`) when not embedded in --labels
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Compare detectors: metrics, significance tests and agreement
    Evaluate {
        /// Ground truth (JSON Lines `{doc_id, label}`)
        #[arg(long)]
        labels: PathBuf,
        /// Detector output as `[name=]path`; repeat per detector
        #[arg(long, required = true)]
        predictions: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        report: PathBuf,
    },
    /// Write the bundled synthetic demo corpus
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = law_core::synthetic::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CUTOFF_YEAR)]
    pub cutoff_year: i32,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
}

#[derive(Debug, Args)]
pub struct OptionalCorpusArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF_YEAR)]
    pub cutoff_year: i32,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
}

#[derive(Debug, Args)]
pub struct AnomalyArgs {
    /// Multiplier on the change spread in the anomaly threshold
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = Target::Last)]
    pub comparison_target: Target,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Target {
    Last,
    Centroid,
}

impl From<Target> for ComparisonTarget {
    fn from(t: Target) -> Self {
        match t {
            Target::Last => ComparisonTarget::Last,
            Target::Centroid => ComparisonTarget::Centroid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Web,
    Fixture,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value_t = Backend::Fixture)]
    pub llm_backend: Backend,
    /// Fixture directory (read by the fixture backend, cache for the web one)
    #[arg(long)]
    pub fixture_dir: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub grid_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::F1)]
    pub objective: ObjectiveArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    F1,
    Accuracy,
}

impl GridArgs {
    pub fn grid(&self) -> Grid {
        Grid {
            min: self.grid_min,
            max: self.grid_max,
            step: self.grid_step,
        }
    }

    pub fn objective(&self) -> Objective {
        match self.objective {
            ObjectiveArg::F1 => Objective::F1,
            ObjectiveArg::Accuracy => Objective::Accuracy,
        }
    }
}
