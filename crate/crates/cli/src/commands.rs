use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use law_core::attribution::{self, DocumentScore, FixtureClient, LlmClient};
use law_core::corpus::{self, Corpus, CorpusError, Document, Label};
use law_core::drift::{self, AuthorProfile, ComparisonTarget, DriftConfig, DriftWarning};
use law_core::metrics::{self, McNemar, Predictions};
use law_core::{stylometry, synthetic};

use crate::args::{AnomalyArgs, Backend, BackendArgs, Command, CorpusArgs};
use crate::records::{self, FailureInfo, FailureRecord, ReportRecord};
use crate::{cached, BackendFactory, EXIT_INVALID, EXIT_OK, EXIT_RUNTIME};

pub fn execute(
    command: Command,
    backend: &dyn BackendFactory,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    match command {
        Command::Validate { corpus, report } => cmd_validate(&corpus, report.as_deref(), out),
        Command::Profile { corpus, profiles_dir } => cmd_profile(&corpus, &profiles_dir, out, err),
        Command::Genref {
            corpus,
            decision,
            profiles_dir,
            fixture_dir,
            model,
            all,
            parallel,
        } => {
            let job = GenrefJob {
                corpus: &corpus,
                decision: &decision,
                profiles_dir: profiles_dir.as_deref(),
                fixture_dir: &fixture_dir,
                model: &model,
                all,
                parallel,
            };
            cmd_genref(job, backend, out, err)
        }
        Command::Detect {
            corpus,
            decision,
            theta,
            profiles_dir,
            backend: b,
            report,
            parallel,
        } => {
            attribution::AttributionParams::new(theta, decision.k, decision.comparison_target.into())?;
            let ctx = Pipeline::new(&corpus, &decision, profiles_dir.as_deref(), err)?;
            let client = make_client(&b, backend, parallel)?;
            let scored = ctx.score_all(client.as_ref(), parallel)?;
            let mut runtime_failures = 0;
            let records: Vec<ReportRecord> = scored
                .into_iter()
                .map(|s| match s {
                    Scored::Ok(score) => ReportRecord::Verdict(score.verdict(theta)),
                    Scored::Failed(f, fatal) => {
                        runtime_failures += usize::from(fatal);
                        ReportRecord::Failure(f)
                    }
                })
                .collect();
            records::write_file(&report, &records::to_jsonl(&records))?;
            let positives = records
                .iter()
                .filter(|r| matches!(r, ReportRecord::Verdict(v) if v.label == Label::LlmAssisted))
                .count();
            let verdicts = records.iter().filter(|r| matches!(r, ReportRecord::Verdict(_))).count();
            writeln!(
                out,
                "{verdicts} verdicts ({positives} llm_assisted), {} without verdict; report: {}",
                records.len() - verdicts,
                report.display()
            )?;
            Ok(if runtime_failures > 0 { EXIT_RUNTIME } else { EXIT_OK })
        }
        Command::Tune {
            corpus,
            decision,
            profiles_dir,
            backend: b,
            labels,
            predictions,
            grid,
            report,
            parallel,
        } => {
            let (scores, truth, code) = match &corpus.manifest {
                Some(manifest) => {
                    let cargs = CorpusArgs {
                        manifest: manifest.clone(),
                        cutoff_year: corpus.cutoff_year,
                        window: corpus.window,
                    };
                    pipeline_scores(
                        &cargs,
                        &decision,
                        profiles_dir.as_deref(),
                        &b,
                        labels.as_deref(),
                        backend,
                        parallel,
                        err,
                    )?
                }
                None => {
                    let labels = labels.ok_or_else(|| records::invalid("tune needs --manifest or --labels".into()))?;
                    let (s, t) = file_scores(&labels, predictions.as_deref())?;
                    (s, t, EXIT_OK)
                }
            };
            let result = metrics::tune_threshold(&scores, &truth, &grid.grid(), grid.objective())?;
            writeln!(
                out,
                "theta* = {}, {} = {}",
                result.theta, result.objective, result.value
            )?;
            if let Some(path) = report {
                records::write_file(&path, &(serde_json::to_string_pretty(&result)? + "\n"))?;
            }
            Ok(code)
        }
        Command::Evaluate {
            labels,
            predictions,
            grid,
            report,
        } => {
            let truth = records::read_labels(&labels)?.labels;
            let mut detectors = Vec::new();
            for arg in &predictions {
                let (name, path) = match arg.split_once('=') {
                    Some((n, p)) => (n.to_string(), Path::new(p).to_path_buf()),
                    None => {
                        let p = Path::new(arg);
                        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
                        (stem.to_string(), p.to_path_buf())
                    }
                };
                detectors.push((name, records::read_predictions(&path)?));
            }
            let r = metrics::evaluate(&truth, &detectors, &grid.grid(), grid.objective(), &McNemar)?;
            records::write_file(&report, &(serde_json::to_string_pretty(&r)? + "\n"))?;
            print_metric_report(&r, out)?;
            Ok(EXIT_OK)
        }
        Command::Synth { out: dir, seed } => {
            let corpus = synthetic::generate(seed);
            let written = synthetic::write_corpus(&corpus, &dir)
                .with_context(|| format!("writing synthetic corpus to {}", dir.display()))?;
            writeln!(
                out,
                "wrote {} documents: manifest {}, fixtures {}, labels {}",
                corpus.documents.len(),
                written.manifest.display(),
                written.fixture_dir.display(),
                written.labels.display()
            )?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_validate(args: &CorpusArgs, report: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let corpus = match corpus::load_manifest(&args.manifest) {
        Ok(c) => c,
        Err(e @ CorpusError::Io { .. }) => return Err(e.into()),
        Err(e) => {
            writeln!(out, "error\t{}\t{e}", args.manifest.display())?;
            return Ok(EXIT_INVALID);
        }
    };
    let r = corpus::validate(&corpus, args.cutoff_year, args.window)?;
    for e in &r.errors {
        writeln!(out, "error\t{}\t{}\t{}", e.subject, e.code.as_str(), e.message)?;
    }
    for w in &r.warnings {
        writeln!(out, "warning\t{}\t{}\t{}", w.subject, w.code.as_str(), w.message)?;
    }
    writeln!(
        out,
        "{} documents, {} errors, {} warnings",
        corpus.len(),
        r.errors.len(),
        r.warnings.len()
    )?;
    if let Some(path) = report {
        records::write_file(path, &(serde_json::to_string_pretty(&r)? + "\n"))?;
    }
    Ok(if r.is_ok() { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_profile(args: &CorpusArgs, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let corpus = corpus::load_manifest(&args.manifest)?;
    let cfg = DriftConfig::new(args.window, drift::DEFAULT_K)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (mut written, mut failed) = (0, 0);
    for author in corpus.authors() {
        let window = match corpus::training_window(&corpus, author, args.cutoff_year, cfg.window) {
            Ok(w) => w,
            Err(e) => {
                writeln!(err, "warning: skipping {author}: {e}")?;
                continue;
            }
        };
        match drift::fit_profile(&window, &cfg) {
            Ok(fit) => {
                warn_fit(author, &fit.warnings, err)?;
                let path = corpus::store_profile(&fit.profile, dir)?;
                writeln!(out, "{author}\t{}", path.display())?;
                written += 1;
            }
            Err(e) => {
                writeln!(err, "error: {author}: {e}")?;
                failed += 1;
            }
        }
    }
    writeln!(out, "{written} profiles written, {failed} failed")?;
    Ok(if failed > 0 { EXIT_INVALID } else { EXIT_OK })
}

fn warn_fit(author: &str, warnings: &[DriftWarning], err: &mut dyn Write) -> Result<()> {
    for w in warnings {
        match w {
            DriftWarning::DegenerateSpread => {
                writeln!(err, "warning: {author}: change spread is zero (DegenerateSpread)")?
            }
        }
    }
    Ok(())
}

struct GenrefJob<'a> {
    corpus: &'a CorpusArgs,
    decision: &'a AnomalyArgs,
    profiles_dir: Option<&'a Path>,
    fixture_dir: &'a Path,
    model: &'a str,
    all: bool,
    parallel: usize,
}

fn cmd_genref(
    job: GenrefJob<'_>,
    backend: &dyn BackendFactory,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let ctx = Pipeline::new(job.corpus, job.decision, job.profiles_dir, err)?;
    let mut targets: Vec<&Document> = Vec::new();
    for doc in ctx.corpus.post_cutoff(ctx.cutoff_year) {
        if job.all {
            targets.push(doc);
            continue;
        }
        let Some(profile) = ctx.profiles.get(&doc.author_id) else {
            continue;
        };
        let Ok(raw) = stylometry::extract(&doc.body) else {
            continue;
        };
        let d = drift::anomaly_score(profile, &raw, ctx.target)?;
        if drift::is_anomalous(profile, d, ctx.k) {
            targets.push(doc);
        }
    }
    let client = cached(backend.web_client(job.model, job.parallel)?, job.fixture_dir);
    let results = pool(job.parallel)?.install(|| {
        targets
            .par_iter()
            .map(|doc| (doc.doc_id.clone(), attribution::fetch_reference(client.as_ref(), doc)))
            .collect::<Vec<_>>()
    });
    let mut failed = 0;
    for (doc_id, r) in &results {
        match r {
            Ok(c) => writeln!(out, "{doc_id}\t{}", serde_json::to_string(&c.source)?.trim_matches('"'))?,
            Err(e) => {
                failed += 1;
                writeln!(err, "error: {doc_id}: {e}")?;
            }
        }
    }
    writeln!(out, "{} references ready, {failed} failed", results.len() - failed)?;
    Ok(if failed > 0 { EXIT_RUNTIME } else { EXIT_OK })
}

fn pool(parallel: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .context("building worker pool")
}

fn make_client(b: &BackendArgs, backend: &dyn BackendFactory, parallel: usize) -> Result<Box<dyn LlmClient>> {
    match b.llm_backend {
        Backend::Fixture => {
            let dir = b
                .fixture_dir
                .as_ref()
                .ok_or_else(|| records::invalid("--fixture-dir is required with the fixture backend".into()))?;
            Ok(Box::new(FixtureClient::new(dir)))
        }
        Backend::Web => {
            let model = b
                .model
                .as_deref()
                .ok_or_else(|| records::invalid("--model is required with the web backend".into()))?;
            let client = backend.web_client(model, parallel)?;
            Ok(match &b.fixture_dir {
                Some(dir) => cached(client, dir),
                None => client,
            })
        }
    }
}

enum Scored {
    Ok(DocumentScore),
    /// `true` for runtime failures, `false` for skipped documents.
    Failed(FailureRecord, bool),
}

struct Unavailable {
    code: &'static str,
    message: String,
    fatal: bool,
}

/// A loaded corpus with one profile per eligible author.
struct Pipeline {
    corpus: Corpus,
    cutoff_year: i32,
    k: u32,
    target: ComparisonTarget,
    profiles: BTreeMap<String, AuthorProfile>,
    unavailable: BTreeMap<String, Unavailable>,
}

impl Pipeline {
    fn new(
        args: &CorpusArgs,
        decision: &AnomalyArgs,
        profiles_dir: Option<&Path>,
        err: &mut dyn Write,
    ) -> Result<Self> {
        let corpus = corpus::load_manifest(&args.manifest)?;
        let cfg = DriftConfig::new(args.window, decision.k)?;
        let mut profiles = BTreeMap::new();
        let mut unavailable = BTreeMap::new();
        if let Some(dir) = profiles_dir {
            for p in corpus::load_profiles_dir(dir)? {
                profiles.insert(p.author_id.clone(), p);
            }
            for author in corpus.authors() {
                if !profiles.contains_key(author) {
                    unavailable.insert(
                        author.to_string(),
                        Unavailable {
                            code: "NoProfile",
                            message: format!("no profile in {}", dir.display()),
                            fatal: false,
                        },
                    );
                }
            }
        } else {
            for author in corpus.authors() {
                let fitted = corpus::training_window(&corpus, author, args.cutoff_year, cfg.window)
                    .map_err(|e| Unavailable {
                        code: "InsufficientHistory",
                        message: e.to_string(),
                        fatal: false,
                    })
                    .and_then(|w| {
                        drift::fit_profile(&w, &cfg).map_err(|e| Unavailable {
                            code: "ProfileFit",
                            message: e.to_string(),
                            fatal: true,
                        })
                    });
                match fitted {
                    Ok(fit) => {
                        warn_fit(author, &fit.warnings, err)?;
                        profiles.insert(author.to_string(), fit.profile);
                    }
                    Err(u) => {
                        unavailable.insert(author.to_string(), u);
                    }
                }
            }
        }
        Ok(Self {
            corpus,
            cutoff_year: args.cutoff_year,
            k: cfg.k,
            target: decision.comparison_target.into(),
            profiles,
            unavailable,
        })
    }

    fn score_one(&self, doc: &Document, client: &dyn LlmClient) -> Scored {
        let failure = |code: &str, message: String| FailureRecord {
            doc_id: doc.doc_id.clone(),
            author_id: doc.author_id.clone(),
            failure: FailureInfo {
                code: code.to_string(),
                message,
            },
        };
        let Some(profile) = self.profiles.get(&doc.author_id) else {
            return match self.unavailable.get(&doc.author_id) {
                Some(u) => Scored::Failed(failure(u.code, u.message.clone()), u.fatal),
                None => Scored::Failed(failure("NoProfile", "author has no profile".into()), false),
            };
        };
        match attribution::score_document(profile, doc, client, self.k, self.target) {
            Ok(s) => Scored::Ok(s),
            Err(e) => Scored::Failed(failure(e.code(), e.to_string()), true),
        }
    }

    /// Scores every post-cutoff document; output is in doc_id order
    /// regardless of `parallel`.
    fn score_all(&self, client: &dyn LlmClient, parallel: usize) -> Result<Vec<Scored>> {
        let targets: Vec<&Document> = self.corpus.post_cutoff(self.cutoff_year).collect();
        Ok(pool(parallel)?.install(|| targets.par_iter().map(|d| self.score_one(d, client)).collect()))
    }
}

#[allow(clippy::too_many_arguments)]
fn pipeline_scores(
    cargs: &CorpusArgs,
    decision: &AnomalyArgs,
    profiles_dir: Option<&Path>,
    b: &BackendArgs,
    labels: Option<&Path>,
    backend: &dyn BackendFactory,
    parallel: usize,
    err: &mut dyn Write,
) -> Result<(Vec<f64>, Vec<Label>, i32)> {
    let ctx = Pipeline::new(cargs, decision, profiles_dir, err)?;
    let external = labels.map(records::read_labels).transpose()?.map(|l| l.labels);
    let client = make_client(b, backend, parallel)?;
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    let mut code = EXIT_OK;
    for s in ctx.score_all(client.as_ref(), parallel)? {
        match s {
            Scored::Ok(score) => {
                let label = match &external {
                    Some(map) => map.get(&score.doc_id).copied(),
                    None => ctx.corpus.get(&score.doc_id).and_then(|d| d.ground_truth_label),
                };
                match label {
                    Some(l) => {
                        scores.push(score.tuning_score());
                        truth.push(l);
                    }
                    None => writeln!(err, "warning: {} has no label; not used for tuning", score.doc_id)?,
                }
            }
            Scored::Failed(f, fatal) => {
                writeln!(err, "warning: {}: {} ({})", f.doc_id, f.failure.message, f.failure.code)?;
                if fatal {
                    code = EXIT_RUNTIME;
                }
            }
        }
    }
    if truth.is_empty() {
        bail!("no labelled post-cutoff documents to tune on");
    }
    Ok((scores, truth, code))
}

fn file_scores(labels: &Path, predictions: Option<&Path>) -> Result<(Vec<f64>, Vec<Label>)> {
    let file = records::read_labels(labels)?;
    let scores = match predictions {
        Some(p) => match records::read_predictions(p)? {
            Predictions::Scores(s) => s,
            Predictions::Labels(_) => {
                return Err(records::invalid(format!(
                    "{}: tuning needs scores, found hard labels",
                    p.display()
                )))
            }
        },
        None => file.scores,
    };
    let mut s = Vec::new();
    let mut t = Vec::new();
    for (doc_id, label) in &file.labels {
        let score = scores
            .get(doc_id)
            .ok_or_else(|| records::invalid(format!("no score for {doc_id}")))?;
        s.push(*score);
        t.push(*label);
    }
    Ok((s, t))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undef".to_string(), |x| format!("{x:.3}"))
}

fn print_metric_report(r: &metrics::MetricReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{} items, {} positive", r.items, r.positives)?;
    writeln!(out, "detector\taccuracy\tf1\trecall\tprecision\tfpr")?;
    for d in &r.detectors {
        let m = &d.metrics;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            d.name,
            fmt_opt(m.accuracy),
            fmt_opt(m.f1),
            fmt_opt(m.recall),
            fmt_opt(m.precision),
            fmt_opt(m.fpr)
        )?;
    }
    match &r.omnibus {
        Some(o) => writeln!(
            out,
            "omnibus chi2 = {:.2}, df = {}, p = {:.3e}",
            o.test.statistic, o.test.df, o.test.p_value
        )?,
        None => writeln!(out, "omnibus: {}", r.omnibus_note.as_deref().unwrap_or("n/a"))?,
    }
    for p in &r.pairwise {
        writeln!(out, "{} vs {}: {}", p.a, p.b, p.display)?;
    }
    if let Some(k) = r.fleiss_kappa {
        writeln!(out, "fleiss kappa = {k:.3}")?;
    }
    for k in &r.cohens_kappa {
        writeln!(out, "cohen kappa {} / {} = {:.3}", k.a, k.b, k.kappa)?;
    }
    Ok(())
}
