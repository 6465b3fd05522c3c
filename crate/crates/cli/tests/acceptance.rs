//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{law, s};
use law_core::attribution::{self, FixtureClient};
use law_core::corpus::{self, Label};
use law_core::drift::{self, ComparisonTarget, DriftConfig};
use law_core::metrics::{self, Grid, Objective};
use law_core::stylometry::{self, StyleVector};
use law_core::synthetic;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table_consistency() -> Check {
    let columns = [
        (0.250, 0.334, 0.286),
        (0.421, 0.534, 0.471),
        (0.575, 0.627, 0.600),
        (0.575, 0.627, 0.600),
        (0.700, 0.700, 0.700),
    ];
    for (p, r, f1) in columns {
        let got = metrics::f1_score(p, r).ok_or("f1 undefined")?;
        ensure((got - f1).abs() < 0.0005, || {
            format!("P={p} R={r}: f1 {got:.4} vs {f1}")
        })?;
    }
    Ok(())
}

fn omnibus_magnitude() -> Check {
    let p = metrics::chi2_sf(133.0, 4);
    ensure(p < 0.001, || format!("chi2_sf(133, 4) = {p}"))?;
    for i in 0..=5000 {
        let x = i as f64 * 0.01;
        let got = metrics::chi2_sf(x, 2);
        let want = (-x / 2.0).exp();
        ensure((got - want).abs() < 1e-10, || format!("df=2 x={x}: {got} vs {want}"))?;
    }
    Ok(())
}

fn synthetic_detection() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("corpus");
    let o = law(&["synth", "--out", s(&out)]);
    ensure(o.code == 0, || format!("synth failed: {}", o.stderr))?;
    let manifest = out.join("manifest.jsonl");
    let fixtures = out.join("fixtures");
    let common_args = [
        "--manifest",
        s(&manifest),
        "--window",
        "6",
        "--k",
        "1",
        "--llm-backend",
        "fixture",
        "--fixture-dir",
        s(&fixtures),
    ];

    let o = law(&[&["tune"][..], &common_args].concat());
    ensure(o.code == 0, || format!("tune failed: {}", o.stderr))?;
    let theta = o
        .stdout
        .trim()
        .strip_prefix("theta* = ")
        .and_then(|rest| rest.split(',').next())
        .ok_or_else(|| format!("unexpected tune output {:?}", o.stdout))?
        .to_string();

    let detect = |name: &str| -> Result<String, String> {
        let report = dir.path().join(name);
        let o = law(&[
            &["detect"][..],
            &common_args,
            &["--theta", &theta, "--report", s(&report)],
        ]
        .concat());
        ensure(o.code == 0, || format!("detect failed: {}", o.stderr))?;
        fs::read_to_string(report).map_err(|e| e.to_string())
    };
    let first = detect("run1.jsonl")?;
    let second = detect("run2.jsonl")?;
    ensure(first == second, || "reports differ between runs".into())?;

    let mut labels = BTreeMap::new();
    for line in first.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let label = v["label"]
            .as_str()
            .ok_or_else(|| format!("record without label: {line}"))?;
        labels.insert(v["doc_id"].as_str().unwrap_or_default().to_string(), label.to_string());
    }
    let expected: BTreeMap<String, String> = synthetic::AUTHORS
        .iter()
        .map(|a| {
            let id = format!("{a}-07");
            let label = if id == synthetic::BLENDED_DOC_ID {
                "llm_assisted"
            } else {
                "human"
            };
            (id, label.to_string())
        })
        .collect();
    ensure(labels == expected, || format!("theta {theta}: labels {labels:?}"))
}

fn brute_cohen(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len() as f64;
    let p_o = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut chance = 0usize;
    for x in a {
        for y in b {
            chance += usize::from(x == y);
        }
    }
    let p_e = chance as f64 / (n * n);
    if p_e == 1.0 {
        1.0
    } else {
        (p_o - p_e) / (1.0 - p_e)
    }
}

fn brute_fleiss(ratings: &[Vec<u8>]) -> f64 {
    let n = ratings[0].len();
    let mut p_bar = 0.0;
    for item in ratings {
        let mut agreeing = 0usize;
        for i in 0..n {
            for j in 0..n {
                agreeing += usize::from(i != j && item[i] == item[j]);
            }
        }
        p_bar += agreeing as f64 / (n * (n - 1)) as f64;
    }
    p_bar /= ratings.len() as f64;
    let all: Vec<u8> = ratings.iter().flatten().copied().collect();
    let mut chance = 0usize;
    for x in &all {
        for y in &all {
            chance += usize::from(x == y);
        }
    }
    let p_e = chance as f64 / (all.len() * all.len()) as f64;
    if p_e == 1.0 {
        1.0
    } else {
        (p_bar - p_e) / (1.0 - p_e)
    }
}

fn statistical_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for t in 0..1000 {
        let items = rng.random_range(1..=10);
        let cats = rng.random_range(1..=4u8);
        let raters = rng.random_range(2..=5);
        let ratings: Vec<Vec<u8>> = (0..items)
            .map(|_| (0..raters).map(|_| rng.random_range(0..cats)).collect())
            .collect();

        let a: Vec<u8> = ratings.iter().map(|r| r[0]).collect();
        let b: Vec<u8> = ratings.iter().map(|r| r[1]).collect();
        let ck = metrics::cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
        let want = brute_cohen(&a, &b);
        ensure((ck - want).abs() < 1e-12, || format!("table {t}: cohen {ck} vs {want}"))?;

        let (_, counts) = metrics::category_counts(&ratings);
        let fk = metrics::fleiss_kappa(&counts).map_err(|e| e.to_string())?;
        let want = brute_fleiss(&ratings);
        ensure((fk - want).abs() < 1e-12, || {
            format!("table {t}: fleiss {fk} vs {want}")
        })?;

        let (bb, cc) = (rng.random_range(0..60u64), rng.random_range(0..60u64));
        if bb + cc > 0 {
            let got = metrics::mcnemar(bb, cc).statistic;
            let d = bb as i64 - cc as i64;
            let want = (d * d) as f64 / (bb + cc) as f64;
            ensure(got == want, || format!("mcnemar({bb}, {cc}) = {got}, expected {want}"))?;
        }
    }
    Ok(())
}

fn brute_f1(scores: &[f64], labels: &[bool], theta: f64) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (s, l) in scores.iter().zip(labels) {
        match (*s > theta, *l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        0.0
    } else {
        (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
    }
}

fn tuner_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid: Vec<f64> = (0..=200).map(|i| (i as f64 - 100.0) / 100.0).collect();
    for t in 0..200 {
        let n = rng.random_range(1..=20);
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.3) {
                    grid[rng.random_range(0..grid.len())]
                } else {
                    rng.random_range(-1.1..1.1)
                }
            })
            .collect();
        let truth: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let labels: Vec<Label> = truth.iter().map(|b| Label::from_positive(*b)).collect();
        let r =
            metrics::tune_threshold(&scores, &labels, &Grid::default(), Objective::F1).map_err(|e| e.to_string())?;

        let values: Vec<f64> = grid.iter().map(|th| brute_f1(&scores, &truth, *th)).collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let largest = grid
            .iter()
            .zip(&values)
            .filter(|(_, v)| **v == best)
            .map(|(g, _)| *g)
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(r.value == best, || {
            format!("set {t}: value {} vs exhaustive {best}", r.value)
        })?;
        ensure(r.theta == largest, || {
            format!("set {t}: theta {} vs largest maximizer {largest}", r.theta)
        })?;
    }
    Ok(())
}

fn stylometry_invariants() -> Check {
    let syn = synthetic::generate(synthetic::DEFAULT_SEED);
    let bodies: Vec<&str> = syn
        .documents
        .iter()
        .filter(|d| d.author_id == "z")
        .take(6)
        .map(|d| d.body.as_str())
        .collect();
    let vectors: Vec<StyleVector> = bodies
        .iter()
        .map(|b| stylometry::extract(b))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (b, v) in bodies.iter().zip(&vectors) {
        let again = stylometry::extract(&String::from(*b)).map_err(|e| e.to_string())?;
        let same = again
            .values
            .iter()
            .zip(&v.values)
            .all(|(x, y)| x.to_bits() == y.to_bits());
        ensure(same, || "extraction is not bit-identical".into())?;
    }

    let st = stylometry::fit_standardizer(&vectors).map_err(|e| e.to_string())?;
    let z: Vec<StyleVector> = vectors
        .iter()
        .map(|v| stylometry::standardize(&st, v))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let m = z.len() as f64;
    for j in 0..st.dim() {
        let col: Vec<f64> = z.iter().map(|v| v.values[j]).collect();
        let mean = col.iter().sum::<f64>() / m;
        if st.kept_mask[j] {
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
            ensure(mean.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9, || {
                format!("feature {j}: mean {mean}, std {sd}")
            })?;
        } else {
            ensure(col.iter().all(|x| *x == 0.0), || {
                format!("dropped feature {j} not zero")
            })?;
        }
    }

    let u = &z[0].values;
    let v = &z[5].values;
    let c = stylometry::cosine(u, v).map_err(|e| e.to_string())?;
    let scaled_u: Vec<f64> = u.iter().map(|x| 3.5 * x).collect();
    let scaled_v: Vec<f64> = v.iter().map(|x| 0.25 * x).collect();
    let c2 = stylometry::cosine(&scaled_u, &scaled_v).map_err(|e| e.to_string())?;
    ensure((c - c2).abs() < 1e-12, || {
        format!("cosine not scale invariant: {c} vs {c2}")
    })?;
    let zero = vec![0.0; u.len()];
    ensure(stylometry::cosine(u, &zero) == Ok(0.0), || {
        "zero-norm cosine is not 0".into()
    })?;

    let toy = stylometry::extract("The cat sat. The cat ran.").map_err(|e| e.to_string())?;
    let the = 15
        + stylometry::FUNCTION_WORDS
            .iter()
            .position(|w| *w == "the")
            .unwrap_or(usize::MAX);
    let checks = [
        ("mean sentence length", toy.values[0], 3.0),
        ("mean word length", toy.values[2], 3.0),
        ("hapax rate", toy.values[4], 2.0 / 6.0),
        ("comma rate", toy.values[7], 0.0),
        ("rate of \"the\"", toy.values[the], 1000.0 * 2.0 / 6.0),
    ];
    for (name, got, want) in checks {
        ensure(got == want, || format!("toy {name}: {got} vs {want}"))?;
    }
    Ok(())
}

fn pipeline_monotonicity() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let written = synthetic::write_corpus(&synthetic::generate(synthetic::DEFAULT_SEED), dir.path())
        .map_err(|e| e.to_string())?;
    let corpus = corpus::load_manifest(&written.manifest).map_err(|e| e.to_string())?;
    let client = FixtureClient::new(&written.fixture_dir);
    let mut prev_anomalies = usize::MAX;
    let mut prev_positives_at_k = vec![usize::MAX; 201];
    for k in 1..=3 {
        let cfg = DriftConfig::new(6, k).map_err(|e| e.to_string())?;
        let mut scores = Vec::new();
        for author in corpus.authors() {
            let window = corpus::training_window(&corpus, author, 2022, 6).map_err(|e| e.to_string())?;
            let profile = drift::fit_profile(&window, &cfg).map_err(|e| e.to_string())?.profile;
            for doc in corpus.by_author(author).filter(|d| d.year > 2022) {
                let sc = attribution::score_document(&profile, doc, &client, k, ComparisonTarget::Last)
                    .map_err(|e| e.to_string())?;
                scores.push(sc);
            }
        }
        let anomalies = scores.iter().filter(|s| s.anomalous).count();
        ensure(anomalies <= prev_anomalies, || {
            format!("k={k}: {anomalies} anomalies > {prev_anomalies}")
        })?;
        prev_anomalies = anomalies;

        let mut prev = usize::MAX;
        for (i, slot) in prev_positives_at_k.iter_mut().enumerate() {
            let theta = (i as f64 - 100.0) / 100.0;
            let positives = scores.iter().filter(|s| s.label(theta) == Label::LlmAssisted).count();
            ensure(positives <= prev, || {
                format!("k={k}: positives rose to {positives} at theta {theta}")
            })?;
            ensure(positives <= *slot, || {
                format!("theta {theta}: positives rose to {positives} at k={k}")
            })?;
            prev = positives;
            *slot = positives;
        }
    }
    Ok(())
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion {
            name: "table F1 consistency",
            budget: Duration::from_secs(1),
            run: table_consistency,
        },
        Criterion {
            name: "omnibus significance magnitude",
            budget: Duration::from_secs(1),
            run: omnibus_magnitude,
        },
        Criterion {
            name: "synthetic end-to-end detection",
            budget: Duration::from_secs(10),
            run: synthetic_detection,
        },
        Criterion {
            name: "statistical oracles",
            budget: Duration::from_secs(5),
            run: statistical_oracles,
        },
        Criterion {
            name: "tuner oracle",
            budget: Duration::from_secs(5),
            run: tuner_oracle,
        },
        Criterion {
            name: "stylometry invariants",
            budget: Duration::from_secs(1),
            run: stylometry_invariants,
        },
        Criterion {
            name: "pipeline monotonicity",
            budget: Duration::from_secs(5),
            run: pipeline_monotonicity,
        },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            ensure(elapsed <= c.budget, || {
                format!("took {elapsed:.2?}, budget {:?}", c.budget)
            })
        });
        match outcome {
            Ok(()) => println!("PASS criterion {}: {} ({elapsed:.2?})", i + 1, c.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {} ({elapsed:.2?}): {msg}", i + 1, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
