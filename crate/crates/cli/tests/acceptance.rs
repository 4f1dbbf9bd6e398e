//! Release acceptance suite. Runs without the libtest harness so that each
//! criterion prints exactly one PASS/FAIL line; the process exits nonzero
//! if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use framecrf::crf::{
    log_partition_and_marginals, nll_and_gradient, viterbi_decode, CrfParams, Hyper,
    TrainInstance,
};
use framecrf::eval::{evaluate_levels, Cascade};
use framecrf::experiments::{
    make_folds, run_ablation, run_composition, run_kfold, CompositionPart, CompositionSpec,
};
use framecrf::pipeline::{predict_corpus, train_all};
use framecrf::synth;
use framecrf::tagging::{decode_labels, encode_labels, LabelSet};
use framecrf::{
    Corpus, Document, FeatureConfig, FeatureVector, FrameInstance, FrameLexicon, RoleSpan,
    Sentence, Token,
};

type Criterion = (u32, &'static str, fn() -> String);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "gradient matches finite differences", criterion_01),
        (2, "exact-inference oracle", criterion_02),
        (3, "marginal consistency", criterion_03),
        (4, "tagging round-trip and role compatibility", criterion_04),
        (5, "metrics golden counts", criterion_05),
        (6, "end-to-end learnability", criterion_06),
        (7, "ablation direction", criterion_07),
        (8, "composition direction", criterion_08),
        (9, "fold validity", criterion_09),
        (10, "training and prediction determinism", criterion_10),
    ];
    // The default hook would splatter backtraces between the result lines.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (number, name, check) in criteria {
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("criterion {number:2} ({name}): PASS — {detail}"),
            Err(payload) => {
                failures += 1;
                let message = payload
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| payload.downcast_ref::<&str>().copied())
                    .unwrap_or("panic");
                println!("criterion {number:2} ({name}): FAIL — {message}");
            }
        }
    }
    let _ = std::panic::take_hook();
    if failures > 0 {
        std::process::exit(1);
    }
}

// --- shared helpers ----------------------------------------------------------

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn random_features(rng: &mut ChaCha20Rng, t_len: usize, n_features: usize) -> FeatureVector {
    let positions = (0..t_len)
        .map(|_| {
            let k = rng.gen_range(0..=3);
            let mut ids: Vec<u32> =
                (0..k).map(|_| rng.gen_range(0..n_features as u32)).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    FeatureVector { positions }
}

fn random_params(rng: &mut ChaCha20Rng, n_features: usize, n_labels: usize) -> CrfParams {
    let dim = n_features * n_labels + n_labels * n_labels;
    let w = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
    CrfParams::from_weights(n_features, n_labels, w).unwrap()
}

/// Path score computed directly from the weight accessors, independent of
/// the dynamic programs under test.
fn path_score(params: &CrfParams, x: &FeatureVector, path: &[usize]) -> f64 {
    let mut score = 0.0;
    for (t, &y) in path.iter().enumerate() {
        for &f in &x.positions[t] {
            score += params.obs(f, y);
        }
        if t > 0 {
            score += params.trans(path[t - 1], y);
        }
    }
    score
}

/// Brute force over all label paths: exact log partition plus the argmax
/// under the same tie-break as the decoder (among equal scores, the path
/// whose labels are smallest read from the end).
fn enumerate_all_paths(params: &CrfParams, x: &FeatureVector, n_labels: usize) -> (f64, Vec<usize>) {
    let t_len = x.positions.len();
    let n_paths = n_labels.pow(t_len as u32);
    let mut scores = Vec::with_capacity(n_paths);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut path = vec![0usize; t_len];
    for code in 0..n_paths {
        let mut c = code;
        for slot in path.iter_mut() {
            *slot = c % n_labels;
            c /= n_labels;
        }
        let s = path_score(params, x, &path);
        scores.push(s);
        let better = match &best {
            None => true,
            Some((bs, bp)) => s > *bs || (s == *bs && path.iter().rev().lt(bp.iter().rev())),
        };
        if better {
            best = Some((s, path.clone()));
        }
    }
    (log_sum_exp(&scores), best.unwrap().1)
}

fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (|diff| {} > {tol})", (a - b).abs());
}

fn fast_hyper() -> Hyper {
    Hyper { l2: 0.1, max_iter: 120, ..Hyper::default() }
}

// --- criteria ----------------------------------------------------------------

fn criterion_01() -> String {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let (n_features, n_labels, t_len) = (50usize, 4usize, 5usize);
    let batch: Vec<TrainInstance> = (0..20)
        .map(|_| TrainInstance {
            features: random_features(&mut rng, t_len, n_features),
            labels: (0..t_len).map(|_| rng.gen_range(0..n_labels)).collect(),
        })
        .collect();
    let dim = n_features * n_labels + n_labels * n_labels;
    let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let l2 = 0.5;
    let (_, grad) = nll_and_gradient(n_features, n_labels, &w, &batch, l2);
    let h = 1e-5;
    let mut max_rel = 0.0f64;
    for i in 0..dim {
        let mut wp = w.clone();
        wp[i] += h;
        let mut wm = w.clone();
        wm[i] -= h;
        let (fp, _) = nll_and_gradient(n_features, n_labels, &wp, &batch, l2);
        let (fm, _) = nll_and_gradient(n_features, n_labels, &wm, &batch, l2);
        let fd = (fp - fm) / (2.0 * h);
        let rel = (grad[i] - fd).abs() / grad[i].abs().max(1.0);
        max_rel = max_rel.max(rel);
    }
    let elapsed = start.elapsed();
    assert!(max_rel <= 1e-4, "max relative gradient error {max_rel:e}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    format!("20 instances, max rel err {max_rel:.2e} in {elapsed:.2?}")
}

fn criterion_02() -> String {
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    let mut max_logz_err = 0.0f64;
    let mut agreeing = 0;
    for _ in 0..100 {
        let t_len = rng.gen_range(1..=6);
        let n_labels = rng.gen_range(2..=5);
        let n_features = rng.gen_range(4..=10);
        let params = random_params(&mut rng, n_features, n_labels);
        let x = random_features(&mut rng, t_len, n_features);
        let (log_z_enum, best_enum) = enumerate_all_paths(&params, &x, n_labels);
        let marginals = log_partition_and_marginals(&params, &x);
        max_logz_err = max_logz_err.max((marginals.log_z - log_z_enum).abs());
        let (decoded, _) = viterbi_decode(&params, &x);
        if decoded == best_enum {
            agreeing += 1;
        }
    }
    assert!(max_logz_err <= 1e-8, "max logZ error {max_logz_err:e}");
    assert_eq!(agreeing, 100, "decoder agreed with enumeration on {agreeing}/100 models");
    format!("100 models, max logZ err {max_logz_err:.1e}, decoder agreement 100/100")
}

fn criterion_03() -> String {
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    let mut max_uni_err = 0.0f64;
    let mut max_bi_err = 0.0f64;
    for _ in 0..100 {
        let t_len = rng.gen_range(1..=6);
        let n_labels = rng.gen_range(2..=5);
        let n_features = rng.gen_range(4..=10);
        let params = random_params(&mut rng, n_features, n_labels);
        let x = random_features(&mut rng, t_len, n_features);
        let m = log_partition_and_marginals(&params, &x);
        for t in 0..t_len {
            let total: f64 = (0..n_labels).map(|y| m.unigram(t, y)).sum();
            max_uni_err = max_uni_err.max((total - 1.0).abs());
        }
        for t in 1..t_len {
            for to in 0..n_labels {
                let total: f64 = (0..n_labels).map(|from| m.bigram(t, from, to)).sum();
                max_bi_err = max_bi_err.max((total - m.unigram(t, to)).abs());
            }
            for from in 0..n_labels {
                let total: f64 = (0..n_labels).map(|to| m.bigram(t, from, to)).sum();
                max_bi_err = max_bi_err.max((total - m.unigram(t - 1, from)).abs());
            }
        }
    }
    assert!(max_uni_err <= 1e-10, "unigram sum error {max_uni_err:e}");
    assert!(max_bi_err <= 1e-9, "bigram reduction error {max_bi_err:e}");
    format!("unigram sum err {max_uni_err:.1e}, bigram reduction err {max_bi_err:.1e}")
}

fn criterion_04() -> String {
    let data = synth::generate(900, 42).unwrap();
    let mut round_tripped = 0;
    for sentence in data.corpus.sentences() {
        for instance in &sentence.frames {
            let label_set = LabelSet::for_lu(&data.lexicon, &instance.lu).unwrap();
            let encoded = encode_labels(sentence.len(), instance, &label_set).unwrap();
            let decoded = decode_labels(&encoded, &instance.target_tokens, &label_set);
            assert_eq!(&decoded.instance, instance, "round-trip mismatch");
            round_tripped += 1;
        }
    }
    assert!(round_tripped >= 1000, "only {round_tripped} instances generated");

    let small = synth::generate(300, 43).unwrap();
    let registry =
        train_all(&small.corpus, &small.lexicon, &FeatureConfig::default(), &fast_hyper())
            .unwrap();
    let (predicted, _) = predict_corpus(&small.corpus, &registry, &small.lexicon).unwrap();
    let mut spans_checked = 0;
    for sentence in predicted.sentences() {
        for instance in &sentence.frames {
            if instance.is_other() {
                assert!(instance.roles.is_empty(), "catch-all frame with roles");
                continue;
            }
            let frames = small.lexicon.frames_for_lu(&instance.lu).unwrap();
            assert!(frames.contains(&instance.frame), "frame outside candidates");
            let fes = small.lexicon.fes_for_frame(&instance.frame).unwrap();
            for role in &instance.roles {
                assert!(
                    fes.contains(&role.fe),
                    "incompatible pair ({}, {})",
                    instance.frame,
                    role.fe
                );
                spans_checked += 1;
            }
        }
    }
    format!("{round_tripped} instances round-tripped, {spans_checked} predicted spans compatible")
}

fn golden_pair() -> (Corpus, Corpus, FrameLexicon) {
    let lexicon = FrameLexicon::build(
        vec![
            ("découvrir".into(), vec!["Becoming_aware".into()]),
            ("attaque".into(), vec!["Attack".into()]),
        ],
        vec![
            (
                "Becoming_aware".into(),
                vec!["Cognizer".into(), "Phenomenon".into(), "Time".into(), "Place".into()],
            ),
            ("Attack".into(), vec!["Assailant".into(), "Victim".into(), "Place".into()]),
        ],
    )
    .unwrap();
    let tok = |i: usize, lemma: &str, pos: &str, head: Option<usize>| Token {
        index: i,
        form: lemma.to_string(),
        lemma: lemma.to_string(),
        pos: pos.into(),
        head,
        deprel: if head.is_none() { "root".into() } else { "dep".into() },
    };
    let base = |doc: &str, sid: &str, target_lemma: &str, pos: &str| {
        let tokens = (0..12)
            .map(|i| {
                if i == 2 {
                    tok(2, target_lemma, pos, None)
                } else {
                    tok(i, "mot", "NOUN", Some(2))
                }
            })
            .collect();
        Sentence { doc_id: doc.into(), sent_id: sid.into(), tokens, frames: vec![] }
    };
    let span = |fe: &str, start: usize, end: usize| RoleSpan { fe: fe.into(), start, end };
    let instance = |lu: &str, frame: &str, roles: Vec<RoleSpan>| FrameInstance {
        lu: lu.into(),
        frame: frame.into(),
        target_tokens: vec![2],
        roles,
    };

    let mut g1 = base("d1", "s1", "découvrir", "VERB");
    g1.frames.push(instance(
        "découvrir",
        "Becoming_aware",
        vec![span("Cognizer", 0, 1), span("Phenomenon", 4, 5), span("Time", 7, 8)],
    ));
    let mut g2 = base("d1", "s2", "attaque", "NOUN");
    g2.frames.push(instance(
        "attaque",
        "Attack",
        vec![span("Assailant", 0, 1), span("Victim", 4, 5), span("Place", 7, 8)],
    ));
    let mut g3 = base("d1", "s3", "découvrir", "VERB");
    g3.frames.push(instance("découvrir", "OTHER", vec![]));
    let gold = Corpus {
        documents: vec![Document {
            doc_id: "d1".into(),
            source: "test".into(),
            sentences: vec![g1, g2, g3],
        }],
    };

    // Two roles clipped short, one missed, one spurious; the second target
    // keeps both roles with sloppy boundaries.
    let mut p1 = base("d1", "s1", "découvrir", "VERB");
    p1.frames.push(instance(
        "découvrir",
        "Becoming_aware",
        vec![span("Cognizer", 1, 1), span("Phenomenon", 4, 4), span("Place", 10, 11)],
    ));
    let mut p2 = base("d1", "s2", "attaque", "NOUN");
    p2.frames.push(instance(
        "attaque",
        "Attack",
        vec![span("Assailant", 0, 2), span("Victim", 5, 6)],
    ));
    let mut p3 = base("d1", "s3", "découvrir", "VERB");
    p3.frames.push(instance("découvrir", "OTHER", vec![]));
    let pred = Corpus {
        documents: vec![Document {
            doc_id: "d1".into(),
            source: "test".into(),
            sentences: vec![p1, p2, p3],
        }],
    };
    (gold, pred, lexicon)
}

fn criterion_05() -> String {
    let (gold, pred, lexicon) = golden_pair();
    let levels = evaluate_levels(&gold, &pred, &lexicon, Cascade::Strict).unwrap().levels;
    assert_eq!((levels.dc.tp, levels.dc.fp, levels.dc.fn_), (2, 0, 0), "DC counts");
    assert_eq!((levels.dc.precision, levels.dc.recall), (1.0, 1.0), "DC rates");
    assert_eq!((levels.sc.tp, levels.sc.fp, levels.sc.fn_), (2, 0, 0), "SC counts");
    assert_eq!((levels.dr.tp, levels.dr.fp, levels.dr.fn_), (4, 1, 2), "DR counts");
    assert_eq!((levels.sr.tp, levels.sr.fp, levels.sr.fn_), (4, 1, 2), "SR counts");
    assert_close(levels.sr.precision, 4.0 / 5.0, 1e-12, "SR precision");
    assert_close(levels.sr.recall, 4.0 / 6.0, 1e-12, "SR recall");

    for seed in 0..10 {
        let data = synth::generate(60, seed).unwrap();
        for cascade in [Cascade::Strict, Cascade::Lenient] {
            let report =
                evaluate_levels(&data.corpus, &data.corpus, &data.lexicon, cascade).unwrap();
            let l = report.levels;
            for (name, prf) in [("dc", l.dc), ("sc", l.sc), ("dr", l.dr), ("sr", l.sr)] {
                assert_eq!(
                    (prf.precision, prf.recall, prf.fmeasure),
                    (1.0, 1.0, 1.0),
                    "self-evaluation {name} at seed {seed}"
                );
            }
        }
    }
    "golden counts exact; self-evaluation perfect on 10 corpora".to_string()
}

fn criterion_06() -> String {
    let start = Instant::now();
    let data = synth::generate(2000, 42).unwrap();
    let plan = make_folds(&data.corpus, 5, 42).unwrap();
    let report = run_kfold(
        &data.corpus,
        &data.lexicon,
        &plan,
        &FeatureConfig::default(),
        &fast_hyper(),
        Cascade::Strict,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let mean = report.summary.sr.fmeasure.mean;
    assert!(mean >= 0.90, "SR F mean {mean:.4} below 0.90");
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    format!("2000 sentences, 5-fold SR F mean {mean:.4} in {elapsed:.1?}")
}

fn criterion_07() -> String {
    let data = synth::generate(700, 42).unwrap();
    let plan = make_folds(&data.corpus, 5, 42).unwrap();
    let rows = run_ablation(
        &data.corpus,
        &data.lexicon,
        &plan,
        &FeatureConfig::default(),
        &fast_hyper(),
        Cascade::Strict,
    )
    .unwrap();
    let all = &rows[0];
    assert_eq!(all.label, "all");
    let minus = rows.iter().find(|r| r.label == "minus dep_path").unwrap();
    for fold in 0..plan.k {
        let full = all.per_fold_sr[fold].recall;
        let reduced = minus.per_fold_sr[fold].recall;
        assert!(
            reduced < full,
            "fold {fold}: recall without path features {reduced:.4} not below {full:.4}"
        );
    }
    format!(
        "SR recall drops {:.4} -> {:.4} (means), strictly in all {} folds",
        all.sr.recall.mean, minus.sr.recall.mean, plan.k
    )
}

fn criterion_08() -> String {
    let data = synth::generate(700, 42).unwrap();
    let out_only = CompositionSpec {
        parts: vec![CompositionPart { source: "WA".into(), fraction: 1.0 }],
        seed: 42,
    };
    let plus_in_source = CompositionSpec {
        parts: vec![
            CompositionPart { source: "WA".into(), fraction: 1.0 },
            CompositionPart { source: "WGM".into(), fraction: 0.1 },
        ],
        seed: 42,
    };
    let rows = run_composition(
        &data.corpus,
        &data.lexicon,
        &[out_only, plus_in_source],
        "WGM",
        false,
        3,
        &FeatureConfig::default(),
        &fast_hyper(),
        Cascade::Strict,
    )
    .unwrap();
    let baseline = rows[0].sr.fmeasure.mean;
    let enriched = rows[1].sr.fmeasure.mean;
    assert!(
        enriched > baseline,
        "adding in-source data did not help: {baseline:.4} -> {enriched:.4}"
    );
    format!("mean SR F {baseline:.4} -> {enriched:.4} after adding 10% in-source")
}

fn criterion_09() -> String {
    // Ten documents with two alternating frame profiles; an exact balance
    // exists (one of each per fold at k=5), so ±20% must hold.
    let tok = |i: usize| Token {
        index: i,
        form: "mot".into(),
        lemma: "mot".into(),
        pos: "NOUN".into(),
        head: if i == 0 { None } else { Some(0) },
        deprel: if i == 0 { "root".into() } else { "dep".into() },
    };
    let sent = |doc: &str, sid: usize, frame: &str| Sentence {
        doc_id: doc.into(),
        sent_id: format!("s{sid}"),
        tokens: (0..3).map(tok).collect(),
        frames: vec![FrameInstance {
            lu: "mot".into(),
            frame: frame.into(),
            target_tokens: vec![0],
            roles: vec![],
        }],
    };
    let documents = (0..10)
        .map(|i| {
            let doc_id = format!("d{i:02}");
            let frames: &[&str] = if i % 2 == 0 {
                &["Becoming_aware", "Becoming_aware", "Attack"]
            } else {
                &["Becoming_aware", "Attack", "Attack", "Deciding"]
            };
            Document {
                doc_id: doc_id.clone(),
                source: "fix".into(),
                sentences: frames
                    .iter()
                    .enumerate()
                    .map(|(sid, f)| sent(&doc_id, sid, f))
                    .collect(),
            }
        })
        .collect();
    let corpus = Corpus { documents };
    let plan = make_folds(&corpus, 5, 42).unwrap();

    // Documents are never split: every document sits in exactly one fold
    // and the fold test sets partition the corpus.
    let mut seen = BTreeSet::new();
    for fold in 0..plan.k {
        for doc_id in plan.test_docs(fold) {
            assert!(seen.insert(doc_id), "document {doc_id} in two folds");
        }
    }
    assert_eq!(seen.len(), corpus.documents.len());

    // Per-frame fold counts within ±20% of the ideal share.
    let mut totals: std::collections::BTreeMap<&str, f64> = Default::default();
    let mut per_fold: Vec<std::collections::BTreeMap<&str, f64>> = vec![Default::default(); 5];
    for doc in &corpus.documents {
        let fold = plan.assignment[&doc.doc_id];
        for s in &doc.sentences {
            for f in &s.frames {
                *totals.entry(f.frame.as_str()).or_default() += 1.0;
                *per_fold[fold].entry(f.frame.as_str()).or_default() += 1.0;
            }
        }
    }
    for (frame, total) in &totals {
        let ideal = total / 5.0;
        for (fold, counts) in per_fold.iter().enumerate() {
            let count = counts.get(frame).copied().unwrap_or(0.0);
            assert!(
                (count - ideal).abs() <= 0.2 * ideal,
                "frame {frame} fold {fold}: {count} vs ideal {ideal}"
            );
        }
    }

    // Plans are byte-reproducible, on this fixture and on generated data.
    let again = make_folds(&corpus, 5, 42).unwrap();
    assert_eq!(serde_json::to_vec(&plan).unwrap(), serde_json::to_vec(&again).unwrap());
    let data = synth::generate(200, 5).unwrap();
    let p1 = make_folds(&data.corpus, 4, 9).unwrap();
    let p2 = make_folds(&data.corpus, 4, 9).unwrap();
    assert_eq!(serde_json::to_vec(&p1).unwrap(), serde_json::to_vec(&p2).unwrap());
    "documents intact, ±20% frame balance, plans byte-reproducible".to_string()
}

fn run_cli(args: &[&str], dir: &Path) {
    let out = Command::new(env!("CARGO_BIN_EXE_framecrf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "framecrf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_model_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "run_config.json")
        .map(|e| {
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

fn criterion_10() -> String {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_cli(&["synth", "--sentences", "150", "--seed", "11", "--out", "data"], d);
    let train = |jobs: &str, out: &str, d: &Path| {
        run_cli(
            &[
                "--jobs", jobs, "train", "--corpus", "data/corpus.jsonl", "--lexicon",
                "data/lexicon.json", "--out-dir", out, "--l2", "0.1", "--max-iter", "60",
            ],
            d,
        )
    };
    train("1", "m1", d);
    train("4", "m2", d);
    train("4", "m3", d);
    let m1 = read_model_files(&d.join("m1"));
    let m2 = read_model_files(&d.join("m2"));
    let m3 = read_model_files(&d.join("m3"));
    assert!(m1.iter().any(|(name, _)| name == "registry.json"));
    assert!(m1.len() > 2, "expected model files, found {}", m1.len());
    assert_eq!(m1, m2, "model files differ between --jobs 1 and --jobs 4");
    assert_eq!(m2, m3, "model files differ between identical runs");

    let predict = |jobs: &str, out: &str, d: &Path| {
        run_cli(
            &[
                "--jobs", jobs, "predict", "--models", "m1", "--corpus", "data/corpus.jsonl",
                "--out", out,
            ],
            d,
        )
    };
    predict("1", "p1.jsonl", d);
    predict("4", "p2.jsonl", d);
    let p1 = std::fs::read(d.join("p1.jsonl")).unwrap();
    let p2 = std::fs::read(d.join("p2.jsonl")).unwrap();
    assert_eq!(p1, p2, "predictions depend on --jobs");
    format!("{} model files byte-identical across runs and thread counts", m1.len())
}
