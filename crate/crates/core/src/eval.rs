//! Four-level scoring of predicted frame instances against gold, plus fold
//! aggregation and analytical breakdowns.
//!
//! The levels form a cascade:
//! * target detection: did the system claim a real frame (anything but the
//!   catch-all) where the gold does?
//! * frame selection: among detections, is the frame right?
//! * segment detection: role spans under a correct frame, labels ignored;
//! * role selection: role spans under a correct frame, labels required.
//!
//! Span comparison is by at-least-one-token overlap with greedy one-to-one
//! assignment, so boundary errors are not penalized.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, FrameInstance, FrameLexicon, RoleSpan, Sentence};
use crate::error::{Error, Result};
use crate::features::target_head;

/// Precision/recall/F with the counts they came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PRF {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
}

impl PRF {
    /// Empty denominators score 1 (nothing claimed, nothing wrong); F is 0
    /// when precision and recall are both 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> PRF {
        let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
        let fmeasure =
            if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        PRF { tp, fp, fn_, precision, recall, fmeasure }
    }
}

/// Whether role scoring is restricted to instances whose frame was selected
/// correctly (the cascade reading) or scored for every detected pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cascade {
    Strict,
    Lenient,
}

/// PRF at each of the four levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelScores {
    pub dc: PRF,
    pub sc: PRF,
    pub dr: PRF,
    pub sr: PRF,
}

/// Scores plus any alignment warnings raised while counting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub levels: LevelScores,
    pub warnings: Vec<String>,
}

// --- span matching ----------------------------------------------------------

/// One-to-one span assignment by index into the input lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanMatching {
    /// `(gold index, pred index)` pairs.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_gold: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

fn greedy_assign(
    gold: &[RoleSpan],
    pred: &[RoleSpan],
    gold_free: &mut [bool],
    pred_free: &mut [bool],
    same_label_only: Option<bool>,
    pairs: &mut Vec<(usize, usize)>,
) {
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (i, g) in gold.iter().enumerate() {
        if !gold_free[i] {
            continue;
        }
        for (j, p) in pred.iter().enumerate() {
            if !pred_free[j] {
                continue;
            }
            if let Some(want_equal) = same_label_only {
                if (g.fe == p.fe) != want_equal {
                    continue;
                }
            }
            let ov = g.overlap(p);
            if ov > 0 {
                candidates.push((i, j, ov));
            }
        }
    }
    candidates.sort_by(|a, b| {
        let ka = (std::cmp::Reverse(a.2), gold[a.0].start, gold[a.0].end, pred[a.1].start, pred[a.1].end, a.0, a.1);
        let kb = (std::cmp::Reverse(b.2), gold[b.0].start, gold[b.0].end, pred[b.1].start, pred[b.1].end, b.0, b.1);
        ka.cmp(&kb)
    });
    for (i, j, _) in candidates {
        if gold_free[i] && pred_free[j] {
            gold_free[i] = false;
            pred_free[j] = false;
            pairs.push((i, j));
        }
    }
}

/// Greedily pairs overlapping spans one-to-one, largest overlap first, then
/// earliest gold span.
///
/// With `require_label`, only same-label spans may pair. Without it, the
/// label-agnostic assignment still prefers same-label pairs before pairing
/// across labels, so relaxing the label requirement never yields fewer pairs
/// than requiring it.
pub fn match_spans_partial(gold: &[RoleSpan], pred: &[RoleSpan], require_label: bool) -> SpanMatching {
    let mut gold_free = vec![true; gold.len()];
    let mut pred_free = vec![true; pred.len()];
    let mut pairs = Vec::new();
    greedy_assign(gold, pred, &mut gold_free, &mut pred_free, Some(true), &mut pairs);
    if !require_label {
        greedy_assign(gold, pred, &mut gold_free, &mut pred_free, Some(false), &mut pairs);
    }
    pairs.sort_unstable();
    SpanMatching {
        pairs,
        unmatched_gold: gold_free.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect(),
        unmatched_pred: pred_free.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect(),
    }
}

// --- the counting engine ----------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
struct RawCounts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl RawCounts {
    fn prf(self) -> PRF {
        PRF::from_counts(self.tp, self.fp, self.fn_)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Tp,
    Fp,
    Fn,
}

/// One role-level outcome, tagged with everything the breakdowns group by.
#[derive(Debug, Clone)]
struct SrEvent {
    kind: EventKind,
    /// Flat index of the sentence within the gold corpus.
    sentence: usize,
    target: TargetType,
    frame: String,
    fe: String,
}

struct Events {
    dc: RawCounts,
    sc: RawCounts,
    dr: RawCounts,
    sr: Vec<SrEvent>,
    warnings: Vec<String>,
}

impl Events {
    fn sr_counts(&self) -> RawCounts {
        let mut c = RawCounts::default();
        for e in &self.sr {
            match e.kind {
                EventKind::Tp => c.tp += 1,
                EventKind::Fp => c.fp += 1,
                EventKind::Fn => c.fn_ += 1,
            }
        }
        c
    }

    fn levels(&self) -> LevelScores {
        LevelScores {
            dc: self.dc.prf(),
            sc: self.sc.prf(),
            dr: self.dr.prf(),
            sr: self.sr_counts().prf(),
        }
    }
}

/// Syntactic class of a target: its head token's part of speech crossed with
/// whether that token is the sentence root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetType {
    VerbRoot,
    VerbNonRoot,
    NounRoot,
    NounNonRoot,
    Other,
}

impl fmt::Display for TargetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TargetType::VerbRoot => "VerbRoot",
            TargetType::VerbNonRoot => "VerbNonRoot",
            TargetType::NounRoot => "NounRoot",
            TargetType::NounNonRoot => "NounNonRoot",
            TargetType::Other => "Other",
        };
        f.write_str(s)
    }
}

fn classify_target(sentence: &Sentence, target_tokens: &[usize]) -> TargetType {
    let head = target_head(sentence, target_tokens);
    let tok = &sentence.tokens[head];
    let root = tok.head.is_none();
    if tok.pos.eq_ignore_ascii_case("VERB") {
        if root { TargetType::VerbRoot } else { TargetType::VerbNonRoot }
    } else if tok.pos.eq_ignore_ascii_case("NOUN") {
        if root { TargetType::NounRoot } else { TargetType::NounNonRoot }
    } else {
        TargetType::Other
    }
}

fn check_instance(lexicon: &FrameLexicon, inst: &FrameInstance, side: &str) -> Result<()> {
    let frames = lexicon
        .frames_for_lu(&inst.lu)
        .ok_or_else(|| Error::Eval(format!("{side} instance of unknown LU '{}'", inst.lu)))?;
    // The catch-all frame is an implicit candidate of every lexical unit.
    if !inst.is_other() && !frames.contains(&inst.frame) {
        return Err(Error::Eval(format!(
            "{side} instance labels '{}' with '{}', not a candidate frame",
            inst.lu, inst.frame
        )));
    }
    Ok(())
}

fn push_role_events(
    events: &mut Vec<SrEvent>,
    kind: EventKind,
    sentence: usize,
    target: TargetType,
    frame: &str,
    roles: impl Iterator<Item = usize>,
    spans: &[RoleSpan],
) {
    for idx in roles {
        events.push(SrEvent {
            kind,
            sentence,
            target,
            frame: frame.to_string(),
            fe: spans[idx].fe.clone(),
        });
    }
}

/// Aligns pred to gold and produces all level counts and role events.
fn collect_events(
    gold: &Corpus,
    pred: &Corpus,
    lexicon: &FrameLexicon,
    cascade: Cascade,
) -> Result<Events> {
    let mut gold_index: HashMap<(&str, &str), (usize, &Sentence)> = HashMap::new();
    for (flat, s) in gold.sentences().enumerate() {
        if gold_index.insert((s.doc_id.as_str(), s.sent_id.as_str()), (flat, s)).is_some() {
            return Err(Error::Eval(format!(
                "gold corpus repeats sentence ({}, {})",
                s.doc_id, s.sent_id
            )));
        }
    }

    let mut events = Events {
        dc: RawCounts::default(),
        sc: RawCounts::default(),
        dr: RawCounts::default(),
        sr: Vec::new(),
        warnings: Vec::new(),
    };
    let mut pred_seen: HashSet<(&str, &str)> = HashSet::new();

    for ps in pred.sentences() {
        let key = (ps.doc_id.as_str(), ps.sent_id.as_str());
        let Some(&(flat, gs)) = gold_index.get(&key) else {
            return Err(Error::Eval(format!(
                "prediction for sentence ({}, {}) absent from gold",
                ps.doc_id, ps.sent_id
            )));
        };
        if !pred_seen.insert(key) {
            return Err(Error::Eval(format!(
                "prediction repeats sentence ({}, {})",
                ps.doc_id, ps.sent_id
            )));
        }
        if ps.tokens.len() != gs.tokens.len() {
            return Err(Error::Eval(format!(
                "sentence ({}, {}) has {} tokens in gold but {} in prediction",
                ps.doc_id,
                ps.sent_id,
                gs.tokens.len(),
                ps.tokens.len()
            )));
        }
        score_sentence(gs, &gs.frames, &ps.frames, flat, lexicon, cascade, &mut events)?;
    }

    // Gold sentences with no predicted counterpart: every positive gold
    // instance is a miss.
    for (flat, gs) in gold.sentences().enumerate() {
        if pred_seen.contains(&(gs.doc_id.as_str(), gs.sent_id.as_str())) {
            continue;
        }
        score_sentence(gs, &gs.frames, &[], flat, lexicon, cascade, &mut events)?;
    }
    Ok(events)
}

fn score_sentence(
    sentence: &Sentence,
    gold: &[FrameInstance],
    pred: &[FrameInstance],
    flat: usize,
    lexicon: &FrameLexicon,
    cascade: Cascade,
    events: &mut Events,
) -> Result<()> {
    for inst in gold {
        check_instance(lexicon, inst, "gold")?;
    }
    for inst in pred {
        check_instance(lexicon, inst, "predicted")?;
    }

    // Group both sides by (lu, target) and align pairwise in order.
    type Aligned<'a> = (Vec<&'a FrameInstance>, Vec<&'a FrameInstance>);
    let mut by_key: BTreeMap<(&str, &[usize]), Aligned> = BTreeMap::new();
    for g in gold {
        by_key.entry((g.lu.as_str(), g.target_tokens.as_slice())).or_default().0.push(g);
    }
    for p in pred {
        by_key.entry((p.lu.as_str(), p.target_tokens.as_slice())).or_default().1.push(p);
    }

    for ((_, target), (golds, preds)) in by_key {
        let ttype = classify_target(sentence, target);
        let n = golds.len().max(preds.len());
        for i in 0..n {
            match (golds.get(i), preds.get(i)) {
                (Some(g), Some(p)) => score_pair(g, p, flat, ttype, cascade, events),
                (Some(g), None) => {
                    if !g.is_other() {
                        events.dc.fn_ += 1;
                        events.sc.fn_ += 1;
                        role_misses(g, flat, ttype, events);
                    }
                }
                (None, Some(p)) => {
                    if !p.is_other() {
                        events.warnings.push(format!(
                            "prediction for '{}' at {:?} in ({}, {}) has no gold candidate",
                            p.lu, p.target_tokens, sentence.doc_id, sentence.sent_id
                        ));
                        events.dc.fp += 1;
                        events.sc.fp += 1;
                        role_extras(p, flat, ttype, events);
                    }
                }
                (None, None) => unreachable!(),
            }
        }
    }
    Ok(())
}

fn role_misses(g: &FrameInstance, flat: usize, ttype: TargetType, events: &mut Events) {
    events.dr.fn_ += g.roles.len();
    push_role_events(&mut events.sr, EventKind::Fn, flat, ttype, &g.frame, 0..g.roles.len(), &g.roles);
}

fn role_extras(p: &FrameInstance, flat: usize, ttype: TargetType, events: &mut Events) {
    events.dr.fp += p.roles.len();
    push_role_events(&mut events.sr, EventKind::Fp, flat, ttype, &p.frame, 0..p.roles.len(), &p.roles);
}

fn score_pair(
    g: &FrameInstance,
    p: &FrameInstance,
    flat: usize,
    ttype: TargetType,
    cascade: Cascade,
    events: &mut Events,
) {
    match (g.is_other(), p.is_other()) {
        (true, true) => return,
        (true, false) => {
            events.dc.fp += 1;
            events.sc.fp += 1;
            role_extras(p, flat, ttype, events);
            return;
        }
        (false, true) => {
            events.dc.fn_ += 1;
            events.sc.fn_ += 1;
            role_misses(g, flat, ttype, events);
            return;
        }
        (false, false) => events.dc.tp += 1,
    }

    let frame_ok = g.frame == p.frame;
    if frame_ok {
        events.sc.tp += 1;
    } else {
        events.sc.fp += 1;
        events.sc.fn_ += 1;
    }
    if !frame_ok && cascade == Cascade::Strict {
        role_misses(g, flat, ttype, events);
        role_extras(p, flat, ttype, events);
        return;
    }

    let blind = match_spans_partial(&g.roles, &p.roles, false);
    events.dr.tp += blind.pairs.len();
    events.dr.fn_ += blind.unmatched_gold.len();
    events.dr.fp += blind.unmatched_pred.len();

    let labeled = match_spans_partial(&g.roles, &p.roles, true);
    for &(gi, _) in &labeled.pairs {
        events.sr.push(SrEvent {
            kind: EventKind::Tp,
            sentence: flat,
            target: ttype,
            frame: g.frame.clone(),
            fe: g.roles[gi].fe.clone(),
        });
    }
    push_role_events(
        &mut events.sr,
        EventKind::Fn,
        flat,
        ttype,
        &g.frame,
        labeled.unmatched_gold.into_iter(),
        &g.roles,
    );
    push_role_events(
        &mut events.sr,
        EventKind::Fp,
        flat,
        ttype,
        &p.frame,
        labeled.unmatched_pred.into_iter(),
        &p.roles,
    );
}

/// Scores a prediction against gold at all four levels.
pub fn evaluate_levels(
    gold: &Corpus,
    pred: &Corpus,
    lexicon: &FrameLexicon,
    cascade: Cascade,
) -> Result<EvalReport> {
    let events = collect_events(gold, pred, lexicon, cascade)?;
    Ok(EvalReport { levels: events.levels(), warnings: events.warnings })
}

// --- fold aggregation --------------------------------------------------------

/// Mean and sample standard deviation of one metric across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Sample statistics (n−1 denominator); needs at least two values.
pub fn mean_std(values: &[f64]) -> Result<MeanStd> {
    if values.len() < 2 {
        return Err(Error::Eval(format!(
            "standard deviation needs at least 2 folds, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(MeanStd { mean, std: var.sqrt() })
}

/// Per-metric mean ± std over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfSummary {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub fmeasure: MeanStd,
}

pub fn aggregate_folds(per_fold: &[PRF]) -> Result<PrfSummary> {
    let collect = |f: fn(&PRF) -> f64| per_fold.iter().map(f).collect::<Vec<_>>();
    Ok(PrfSummary {
        precision: mean_std(&collect(|p| p.precision))?,
        recall: mean_std(&collect(|p| p.recall))?,
        fmeasure: mean_std(&collect(|p| p.fmeasure))?,
    })
}

// --- breakdowns ---------------------------------------------------------------

/// Role-selection PRF per syntactic target class. Buckets partition the
/// overall role counts exactly.
pub fn breakdown_by_target_type(
    gold: &Corpus,
    pred: &Corpus,
    lexicon: &FrameLexicon,
    cascade: Cascade,
) -> Result<BTreeMap<TargetType, PRF>> {
    let events = collect_events(gold, pred, lexicon, cascade)?;
    let mut counts: BTreeMap<TargetType, RawCounts> = BTreeMap::new();
    for e in &events.sr {
        let c = counts.entry(e.target).or_default();
        match e.kind {
            EventKind::Tp => c.tp += 1,
            EventKind::Fp => c.fp += 1,
            EventKind::Fn => c.fn_ += 1,
        }
    }
    Ok(counts.into_iter().map(|(k, v)| (k, v.prf())).collect())
}

/// One sentence-length quantile bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBin {
    pub n_sentences: usize,
    pub mean_length: f64,
    pub prf: PRF,
}

/// Role-selection PRF per sentence-length quantile of the gold corpus.
///
/// Sentences are ranked by token count; bin `i` holds ranks
/// `[i·n/k, (i+1)·n/k)` (integer division), so bin sizes differ by at most
/// one and every bin is non-empty when `n ≥ k`.
pub fn breakdown_by_sentence_length(
    gold: &Corpus,
    pred: &Corpus,
    lexicon: &FrameLexicon,
    cascade: Cascade,
    n_bins: usize,
) -> Result<Vec<LengthBin>> {
    if n_bins == 0 {
        return Err(Error::Eval("need at least one length bin".into()));
    }
    let lengths: Vec<usize> = gold.sentences().map(|s| s.tokens.len()).collect();
    let n = lengths.len();
    if n < n_bins {
        return Err(Error::Eval(format!("{n} sentences cannot fill {n_bins} length bins")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| lengths[i]);
    let mut bin_of_sentence = vec![0usize; n];
    for b in 0..n_bins {
        let lo = b * n / n_bins;
        let hi = (b + 1) * n / n_bins;
        for &sent in &order[lo..hi] {
            bin_of_sentence[sent] = b;
        }
    }

    let events = collect_events(gold, pred, lexicon, cascade)?;
    let mut counts = vec![RawCounts::default(); n_bins];
    for e in &events.sr {
        let c = &mut counts[bin_of_sentence[e.sentence]];
        match e.kind {
            EventKind::Tp => c.tp += 1,
            EventKind::Fp => c.fp += 1,
            EventKind::Fn => c.fn_ += 1,
        }
    }
    let mut bins = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let members = &order[b * n / n_bins..(b + 1) * n / n_bins];
        let mean_length =
            members.iter().map(|&i| lengths[i] as f64).sum::<f64>() / members.len() as f64;
        bins.push(LengthBin { n_sentences: members.len(), mean_length, prf: counts[b].prf() });
    }
    Ok(bins)
}

// --- generic-question grouping -------------------------------------------------

/// Maps `(frame, frame element)` to a coarse question tag; anything
/// unmapped falls into `"other"`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuestionMap {
    map: BTreeMap<(String, String), String>,
}

pub const OTHER_QUESTION: &str = "other";

impl QuestionMap {
    /// Parses tab-separated `frame<TAB>fe<TAB>question` lines; `#` comments
    /// and blank lines are skipped.
    pub fn parse_tsv(text: &str) -> Result<QuestionMap> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (frame, fe, question) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(f), Some(e), Some(q), None) if !f.is_empty() && !e.is_empty() && !q.is_empty() => {
                    (f, e, q)
                }
                _ => {
                    return Err(Error::Eval(format!(
                        "question map line {}: expected frame<TAB>fe<TAB>question",
                        lineno + 1
                    )))
                }
            };
            if map.insert((frame.to_string(), fe.to_string()), question.to_string()).is_some() {
                return Err(Error::Eval(format!(
                    "question map line {}: duplicate entry for ({frame}, {fe})",
                    lineno + 1
                )));
            }
        }
        Ok(QuestionMap { map })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<QuestionMap> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        QuestionMap::parse_tsv(&text)
    }

    /// The mapping shipped with the library.
    pub fn bundled_default() -> QuestionMap {
        QuestionMap::parse_tsv(include_str!("../assets/default_questions.tsv"))
            .expect("bundled question map parses")
    }

    pub fn question(&self, frame: &str, fe: &str) -> &str {
        self.map
            .get(&(frame.to_string(), fe.to_string()))
            .map(String::as_str)
            .unwrap_or(OTHER_QUESTION)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Role-selection PRF re-bucketed by generic question tag.
pub fn group_by_question(
    gold: &Corpus,
    pred: &Corpus,
    lexicon: &FrameLexicon,
    cascade: Cascade,
    qmap: &QuestionMap,
) -> Result<BTreeMap<String, PRF>> {
    let events = collect_events(gold, pred, lexicon, cascade)?;
    let mut counts: BTreeMap<String, RawCounts> = BTreeMap::new();
    for e in &events.sr {
        let c = counts.entry(qmap.question(&e.frame, &e.fe).to_string()).or_default();
        match e.kind {
            EventKind::Tp => c.tp += 1,
            EventKind::Fp => c.fp += 1,
            EventKind::Fn => c.fn_ += 1,
        }
    }
    Ok(counts.into_iter().map(|(k, v)| (k, v.prf())).collect())
}
