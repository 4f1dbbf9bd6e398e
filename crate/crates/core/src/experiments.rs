//! Experimental designs: document-intact balanced k-fold splits, feature
//! ablation sweeps, and training-corpus composition studies.
//!
//! Every run is deterministic given its inputs and seed, so result tables
//! are byte-for-byte reproducible.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, FrameLexicon};
use crate::crf::Hyper;
use crate::error::{Error, Result};
use crate::eval::{aggregate_folds, evaluate_levels, Cascade, LevelScores, PrfSummary, PRF};
use crate::features::{FeatureConfig, FeatureFamily};
use crate::pipeline::{predict_corpus, train_all};

/// A document-to-fold assignment.
///
/// Documents are never split: each belongs to exactly one fold, chosen to
/// keep per-frame instance counts as even as possible across folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// doc_id → fold index in `0..k`.
    pub assignment: BTreeMap<String, usize>,
    /// Final chi-square-style imbalance of the greedy assignment.
    pub balance_score: f64,
}

fn frame_profile(doc: &Document) -> BTreeMap<&str, usize> {
    let mut profile = BTreeMap::new();
    for s in &doc.sentences {
        for f in &s.frames {
            *profile.entry(f.frame.as_str()).or_insert(0) += 1;
        }
    }
    profile
}

fn imbalance(fold_counts: &[BTreeMap<&str, usize>], ideal: &BTreeMap<&str, f64>) -> f64 {
    let mut total = 0.0;
    for (frame, &ideal_count) in ideal {
        for counts in fold_counts {
            let c = *counts.get(frame).unwrap_or(&0) as f64;
            total += (c - ideal_count) * (c - ideal_count) / ideal_count;
        }
    }
    total
}

/// Greedily assigns whole documents to `k` folds, balancing the per-frame
/// instance distribution.
///
/// Documents are taken in decreasing order of instance count (the seed
/// shuffles documents with equal counts); each goes to the fold whose
/// addition minimizes the imbalance, ties to the lowest fold index.
pub fn make_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Experiment(format!("need at least 2 folds, got {k}")));
    }
    if corpus.documents.len() < k {
        return Err(Error::Experiment(format!(
            "cannot split {} documents into {k} folds",
            corpus.documents.len()
        )));
    }

    let mut ideal: BTreeMap<&str, f64> = BTreeMap::new();
    for doc in &corpus.documents {
        for (frame, n) in frame_profile(doc) {
            *ideal.entry(frame).or_insert(0.0) += n as f64;
        }
    }
    for v in ideal.values_mut() {
        *v /= k as f64;
    }

    // Bucket documents by instance count, order buckets descending, and
    // shuffle within each bucket so equal-sized documents rotate with the
    // seed while the overall order stays deterministic.
    let mut by_count: BTreeMap<std::cmp::Reverse<usize>, Vec<&Document>> = BTreeMap::new();
    for doc in &corpus.documents {
        by_count.entry(std::cmp::Reverse(doc.instance_count())).or_default().push(doc);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut ordered: Vec<&Document> = Vec::with_capacity(corpus.documents.len());
    for (_, mut group) in by_count {
        group.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        group.shuffle(&mut rng);
        ordered.extend(group);
    }

    let mut fold_counts: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    let mut assignment = BTreeMap::new();
    for doc in ordered {
        let profile = frame_profile(doc);
        let mut best = (f64::INFINITY, 0usize);
        for j in 0..k {
            for (frame, n) in &profile {
                *fold_counts[j].entry(frame).or_insert(0) += n;
            }
            let score = imbalance(&fold_counts, &ideal);
            for (frame, n) in &profile {
                *fold_counts[j].get_mut(frame).unwrap() -= n;
            }
            if score < best.0 {
                best = (score, j);
            }
        }
        let j = best.1;
        for (frame, n) in &profile {
            *fold_counts[j].entry(frame).or_insert(0) += n;
        }
        assignment.insert(doc.doc_id.clone(), j);
    }

    Ok(FoldPlan { k, assignment, balance_score: imbalance(&fold_counts, &ideal) })
}

impl FoldPlan {
    /// Documents held out by fold `fold`.
    pub fn test_docs(&self, fold: usize) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|&(_, &j)| j == fold)
            .map(|(d, _)| d.as_str())
            .collect()
    }

    /// Splits a corpus into (train, test) around one fold. The corpus must
    /// contain exactly the documents the plan was built from.
    pub fn split(&self, corpus: &Corpus, fold: usize) -> Result<(Corpus, Corpus)> {
        if fold >= self.k {
            return Err(Error::Experiment(format!("fold {fold} out of range for k={}", self.k)));
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for doc in &corpus.documents {
            match self.assignment.get(&doc.doc_id) {
                Some(&j) if j == fold => test.push(doc.clone()),
                Some(_) => train.push(doc.clone()),
                None => {
                    return Err(Error::Experiment(format!(
                        "document '{}' is not covered by the fold plan",
                        doc.doc_id
                    )))
                }
            }
        }
        Ok((Corpus { documents: train }, Corpus { documents: test }))
    }
}

/// Mean ± std per level over the folds of one cross-validation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub dc: PrfSummary,
    pub sc: PrfSummary,
    pub dr: PrfSummary,
    pub sr: PrfSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfoldReport {
    pub per_fold: Vec<LevelScores>,
    pub summary: LevelSummary,
}

fn summarize(per_fold: &[LevelScores]) -> Result<LevelSummary> {
    let pick = |f: fn(&LevelScores) -> PRF| per_fold.iter().map(f).collect::<Vec<_>>();
    Ok(LevelSummary {
        dc: aggregate_folds(&pick(|l| l.dc))?,
        sc: aggregate_folds(&pick(|l| l.sc))?,
        dr: aggregate_folds(&pick(|l| l.dr))?,
        sr: aggregate_folds(&pick(|l| l.sr))?,
    })
}

/// Trains and scores once per fold: train on all documents outside the
/// fold, predict and evaluate on the fold's documents.
pub fn run_kfold(
    corpus: &Corpus,
    lexicon: &FrameLexicon,
    plan: &FoldPlan,
    config: &FeatureConfig,
    hyper: &Hyper,
    cascade: Cascade,
) -> Result<KfoldReport> {
    let mut per_fold = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let (train, test) = plan.split(corpus, fold)?;
        if train.instance_count() == 0 {
            return Err(Error::Experiment(format!("fold {fold} leaves no training instances")));
        }
        let registry = train_all(&train, lexicon, config, hyper)?;
        let (pred, _) = predict_corpus(&test, &registry, lexicon)?;
        per_fold.push(evaluate_levels(&test, &pred, lexicon, cascade)?.levels);
    }
    let summary = summarize(&per_fold)?;
    Ok(KfoldReport { per_fold, summary })
}

// --- feature ablation ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub families: Vec<FeatureFamily>,
    pub per_fold_sr: Vec<PRF>,
    pub sr: PrfSummary,
}

/// Scores the full feature set, then each single-family removal, then the
/// removal of both dependency-parse families together: 7 rows.
pub fn run_ablation(
    corpus: &Corpus,
    lexicon: &FrameLexicon,
    plan: &FoldPlan,
    base: &FeatureConfig,
    hyper: &Hyper,
    cascade: Cascade,
) -> Result<Vec<AblationRow>> {
    let mut configs: Vec<(String, Vec<FeatureFamily>)> =
        vec![("all".into(), FeatureFamily::ALL.to_vec())];
    for family in FeatureFamily::ALL {
        configs.push((
            format!("minus {family}"),
            FeatureFamily::ALL.into_iter().filter(|&f| f != family).collect(),
        ));
    }
    configs.push((
        "minus dependency parse".into(),
        vec![FeatureFamily::Lemma, FeatureFamily::Pos, FeatureFamily::LinDist],
    ));

    let mut rows = Vec::with_capacity(configs.len());
    for (label, families) in configs {
        let config = FeatureConfig { families: families.clone(), ..base.clone() };
        let report = run_kfold(corpus, lexicon, plan, &config, hyper, cascade)?;
        let per_fold_sr: Vec<PRF> = report.per_fold.iter().map(|l| l.sr).collect();
        rows.push(AblationRow { label, families, per_fold_sr, sr: report.summary.sr });
    }
    Ok(rows)
}

// --- training-corpus composition ------------------------------------------------

/// One training-mix ingredient: a fraction of one source's documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPart {
    pub source: String,
    pub fraction: f64,
}

/// A sampled training mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionSpec {
    pub parts: Vec<CompositionPart>,
    pub seed: u64,
}

impl CompositionSpec {
    pub fn label(&self) -> String {
        self.parts
            .iter()
            .map(|p| format!("{:.0}% {}", p.fraction * 100.0, p.source))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn validate(&self, sources: &BTreeSet<&str>) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::Experiment("composition spec has no parts".into()));
        }
        let mut seen = BTreeSet::new();
        for part in &self.parts {
            if !(part.fraction > 0.0 && part.fraction <= 1.0) {
                return Err(Error::Experiment(format!(
                    "fraction {} for source '{}' is outside (0, 1]",
                    part.fraction, part.source
                )));
            }
            if !sources.contains(part.source.as_str()) {
                return Err(Error::Experiment(format!(
                    "source '{}' does not occur in the corpus",
                    part.source
                )));
            }
            if !seen.insert(part.source.as_str()) {
                return Err(Error::Experiment(format!(
                    "source '{}' listed twice in one composition spec",
                    part.source
                )));
            }
        }
        Ok(())
    }
}

/// One sampled, trained, and scored draw of a composition spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionRepeat {
    pub seed: u64,
    pub train_docs: Vec<String>,
    pub test_docs: Vec<String>,
    /// Frame-instance count of the sampled training documents.
    pub train_targets: usize,
    pub levels: LevelScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionRow {
    pub label: String,
    pub spec: CompositionSpec,
    pub repeats: Vec<CompositionRepeat>,
    pub sr: PrfSummary,
}

/// Lexical units with at least one instance in every source of the corpus.
pub fn lus_in_every_source(corpus: &Corpus) -> BTreeSet<String> {
    let mut per_source: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for doc in &corpus.documents {
        let lus = per_source.entry(doc.source.as_str()).or_default();
        for s in &doc.sentences {
            for f in &s.frames {
                lus.insert(f.lu.as_str());
            }
        }
    }
    let mut iter = per_source.values();
    let Some(first) = iter.next() else { return BTreeSet::new() };
    let mut common: BTreeSet<String> = first.iter().map(|s| s.to_string()).collect();
    for lus in iter {
        common.retain(|lu| lus.contains(lu.as_str()));
    }
    common
}

/// Restricts a corpus to instances of the given LUs (documents and
/// sentences are kept; only the frame annotations are filtered).
fn restrict_corpus(corpus: &Corpus, keep: &BTreeSet<String>) -> Corpus {
    let mut out = corpus.clone();
    for doc in &mut out.documents {
        for s in &mut doc.sentences {
            s.frames.retain(|f| keep.contains(&f.lu));
        }
    }
    out
}

/// Restricts a lexicon to the given LUs, keeping only the frames they can
/// evoke (so prediction stops matching the dropped units).
fn restrict_lexicon(lexicon: &FrameLexicon, keep: &BTreeSet<String>) -> Result<FrameLexicon> {
    let mut lus = Vec::new();
    let mut needed_frames = BTreeSet::new();
    for lu in keep {
        let frames = lexicon
            .frames_for_lu(lu)
            .ok_or_else(|| Error::Experiment(format!("LU '{lu}' missing from lexicon")))?;
        lus.push((lu.clone(), frames.iter().cloned().collect::<Vec<_>>()));
        needed_frames.extend(frames.iter().cloned());
    }
    let frames = needed_frames
        .into_iter()
        .map(|f| {
            let fes = lexicon
                .fes_for_frame(&f)
                .map(|set| set.iter().cloned().collect::<Vec<_>>())
                .unwrap_or_default();
            (f, fes)
        })
        .collect();
    FrameLexicon::build(lus, frames)
}

/// Runs every composition spec `repeats` times (repeat `r` uses seed
/// `spec.seed + r`), training on the sampled documents and evaluating on
/// the test source's unsampled documents.
///
/// With `lu_filter`, instances and lexicon entries are first restricted to
/// the LUs present in every source.
#[allow(clippy::too_many_arguments)]
pub fn run_composition(
    corpus: &Corpus,
    lexicon: &FrameLexicon,
    specs: &[CompositionSpec],
    test_source: &str,
    lu_filter: bool,
    repeats: usize,
    config: &FeatureConfig,
    hyper: &Hyper,
    cascade: Cascade,
) -> Result<Vec<CompositionRow>> {
    if repeats < 2 {
        return Err(Error::Experiment(format!(
            "composition needs at least 2 repeats for a std, got {repeats}"
        )));
    }
    let sources: BTreeSet<&str> = corpus.documents.iter().map(|d| d.source.as_str()).collect();
    if !sources.contains(test_source) {
        return Err(Error::Experiment(format!(
            "test source '{test_source}' does not occur in the corpus"
        )));
    }

    let (corpus, lexicon) = if lu_filter {
        let keep = lus_in_every_source(corpus);
        if keep.is_empty() {
            return Err(Error::Experiment("no LU occurs in every source".into()));
        }
        (restrict_corpus(corpus, &keep), restrict_lexicon(lexicon, &keep)?)
    } else {
        (corpus.clone(), lexicon.clone())
    };

    // Documents per source, id-sorted so sampling depends only on content
    // and seed.
    let mut docs_by_source: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
    for doc in &corpus.documents {
        docs_by_source.entry(doc.source.as_str()).or_default().push(doc);
    }
    for docs in docs_by_source.values_mut() {
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    }

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        spec.validate(&sources)?;
        let mut outcomes = Vec::with_capacity(repeats);
        for r in 0..repeats {
            let seed = spec.seed + r as u64;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut train_ids: BTreeSet<String> = BTreeSet::new();
            for part in &spec.parts {
                let pool = &docs_by_source[part.source.as_str()];
                let n_take = ((part.fraction * pool.len() as f64).round() as usize)
                    .clamp(1, pool.len());
                let mut shuffled: Vec<&Document> = pool.clone();
                shuffled.shuffle(&mut rng);
                train_ids.extend(shuffled[..n_take].iter().map(|d| d.doc_id.clone()));
            }

            let train_docs: Vec<Document> = corpus
                .documents
                .iter()
                .filter(|d| train_ids.contains(&d.doc_id))
                .cloned()
                .collect();
            let test_docs: Vec<Document> = corpus
                .documents
                .iter()
                .filter(|d| d.source == test_source && !train_ids.contains(&d.doc_id))
                .cloned()
                .collect();
            if test_docs.is_empty() {
                return Err(Error::Experiment(format!(
                    "spec '{}' leaves no test documents in source '{test_source}'",
                    spec.label()
                )));
            }
            let train = Corpus { documents: train_docs };
            let test = Corpus { documents: test_docs };
            if train.instance_count() == 0 {
                return Err(Error::Experiment(format!(
                    "spec '{}' sampled no training instances",
                    spec.label()
                )));
            }

            let registry = train_all(&train, &lexicon, config, hyper)?;
            let (pred, _) = predict_corpus(&test, &registry, &lexicon)?;
            let levels = evaluate_levels(&test, &pred, &lexicon, cascade)?.levels;
            outcomes.push(CompositionRepeat {
                seed,
                train_docs: train.documents.iter().map(|d| d.doc_id.clone()).collect(),
                test_docs: test.documents.iter().map(|d| d.doc_id.clone()).collect(),
                train_targets: train.instance_count(),
                levels,
            });
        }
        let sr_values: Vec<PRF> = outcomes.iter().map(|o| o.levels.sr).collect();
        rows.push(CompositionRow {
            label: spec.label(),
            spec: spec.clone(),
            repeats: outcomes,
            sr: aggregate_folds(&sr_values)?,
        });
    }
    Ok(rows)
}
