//! Corpus data model plus the JSON-lines corpus reader and the lexicon reader.
//!
//! A corpus file is UTF-8 JSON lines, one document per line:
//!
//! ```json
//! {"doc_id":"d1","source":"WGM","sentences":[{"sent_id":"s1","tokens":[
//!   {"form":"Pierre","lemma":"Pierre","pos":"PROPN","head":1,"deprel":"suj"},
//!   {"form":"dormait","lemma":"dormir","pos":"VERB","head":-1,"deprel":"root"}],
//!   "frames":[]}]}
//! ```
//!
//! `head` is a token index within the sentence; `-1` marks the syntactic root.
//! A lexicon file maps each lexical unit to its candidate frames and each frame
//! to its frame-element inventory; the `OTHER` pseudo-frame (an LU occurrence
//! used in a sense outside the frame dictionary) is always present and always
//! has an empty inventory.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Pseudo-frame assigned to a lexical-unit occurrence whose sense is outside
/// the frame dictionary. Carries no roles and has an empty FE inventory.
pub const OTHER_FRAME: &str = "OTHER";

mod head_wire {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(head: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(match head {
            Some(h) => *h as i64,
            None => -1,
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        let v = i64::deserialize(d)?;
        match v {
            -1 => Ok(None),
            h if h >= 0 => Ok(Some(h as usize)),
            h => Err(serde::de::Error::custom(format!("head must be >= -1, got {h}"))),
        }
    }
}

/// One token of a dependency-parsed sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Position within the sentence; derived from array order, not serialized.
    #[serde(skip)]
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: String,
    /// Parent token index; `None` for the syntactic root (`-1` on the wire).
    #[serde(with = "head_wire")]
    pub head: Option<usize>,
    pub deprel: String,
}

/// A labeled frame-element filler: a token span `[start, end]` (inclusive).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RoleSpan {
    pub fe: String,
    pub start: usize,
    pub end: usize,
}

impl RoleSpan {
    pub fn new(fe: impl Into<String>, start: usize, end: usize) -> Self {
        RoleSpan { fe: fe.into(), start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.start <= idx && idx <= self.end
    }

    /// Number of tokens shared with another span.
    pub fn overlap(&self, other: &RoleSpan) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo <= hi {
            hi - lo + 1
        } else {
            0
        }
    }
}

/// One annotated (or predicted) occurrence of a lexical unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameInstance {
    pub lu: String,
    /// Frame name, or [`OTHER_FRAME`].
    pub frame: String,
    /// Target token indices, strictly ascending, non-empty.
    #[serde(rename = "target")]
    pub target_tokens: Vec<usize>,
    #[serde(default)]
    pub roles: Vec<RoleSpan>,
}

impl FrameInstance {
    pub fn is_other(&self) -> bool {
        self.frame == OTHER_FRAME
    }
}

/// A dependency-parsed sentence with its frame annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Owning document id; derived at load time, not serialized.
    #[serde(skip)]
    pub doc_id: String,
    pub sent_id: String,
    pub tokens: Vec<Token>,
    #[serde(default)]
    pub frames: Vec<FrameInstance>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Index of the root token. Valid on structurally validated sentences.
    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().position(|t| t.head.is_none())
    }
}

/// A document: the unit that fold planning never splits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    /// Free-form provenance tag, e.g. an encyclopedia name.
    pub source: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Total number of frame instances, the quantity balanced across folds.
    pub fn instance_count(&self) -> usize {
        self.sentences.iter().map(|s| s.frames.len()).sum()
    }
}

/// An ordered collection of documents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        Corpus { documents }
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    pub fn instance_count(&self) -> usize {
        self.documents.iter().map(|d| d.instance_count()).sum()
    }

    /// Parses and structurally validates a JSON-lines corpus file.
    pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Corpus::from_reader(BufReader::new(file), path)
    }

    /// Same as [`Corpus::parse_corpus`] over any reader; `origin` is used in errors.
    pub fn from_reader(reader: impl BufRead, origin: impl AsRef<Path>) -> Result<Corpus> {
        let origin = origin.as_ref();
        let mut documents = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut doc: Document = serde_json::from_str(&line).map_err(|e| Error::Json {
                path: origin.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
            finalize_document(&mut doc);
            documents.push(doc);
        }
        let corpus = Corpus { documents };
        corpus.validate_structure()?;
        Ok(corpus)
    }

    /// Serializes the corpus as JSON lines, one document per line.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut w, doc)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_jsonl(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Checks every lexicon-independent invariant, naming the violated rule.
    pub fn validate_structure(&self) -> Result<()> {
        let mut seen_docs = HashSet::new();
        for doc in &self.documents {
            if !seen_docs.insert(doc.doc_id.as_str()) {
                return Err(Error::CorpusValidation {
                    doc_id: doc.doc_id.clone(),
                    sent_id: String::new(),
                    rule: "duplicate doc_id".into(),
                });
            }
            for sentence in &doc.sentences {
                validate_sentence(&doc.doc_id, sentence)?;
            }
        }
        Ok(())
    }

    /// Checks the invariants that need a lexicon: LUs are known, frames are
    /// candidates of their LU, FEs belong to the selected frame's inventory,
    /// and `OTHER` instances carry no roles.
    pub fn validate_with_lexicon(&self, lexicon: &FrameLexicon) -> Result<()> {
        for doc in &self.documents {
            for sentence in &doc.sentences {
                for inst in &sentence.frames {
                    validate_instance_lexicon(&doc.doc_id, &sentence.sent_id, inst, lexicon)?;
                }
            }
        }
        Ok(())
    }
}

fn finalize_document(doc: &mut Document) {
    for sentence in &mut doc.sentences {
        sentence.doc_id = doc.doc_id.clone();
        for (i, tok) in sentence.tokens.iter_mut().enumerate() {
            tok.index = i;
        }
    }
}

fn invalid(doc_id: &str, sent_id: &str, rule: impl fmt::Display) -> Error {
    Error::CorpusValidation {
        doc_id: doc_id.to_string(),
        sent_id: sent_id.to_string(),
        rule: rule.to_string(),
    }
}

fn validate_sentence(doc_id: &str, sentence: &Sentence) -> Result<()> {
    let sid = &sentence.sent_id;
    let n = sentence.tokens.len();
    if n == 0 {
        return Err(invalid(doc_id, sid, "sentence has no tokens"));
    }

    let mut root = None;
    for tok in &sentence.tokens {
        match tok.head {
            None => {
                if let Some(prev) = root {
                    return Err(invalid(
                        doc_id,
                        sid,
                        format!("multiple roots: tokens {prev} and {}", tok.index),
                    ));
                }
                root = Some(tok.index);
            }
            Some(h) => {
                if h >= n {
                    return Err(invalid(
                        doc_id,
                        sid,
                        format!("token {} head {h} out of range (sentence has {n} tokens)", tok.index),
                    ));
                }
                if h == tok.index {
                    return Err(invalid(doc_id, sid, format!("token {} is its own head", tok.index)));
                }
            }
        }
    }
    let root = root.ok_or_else(|| invalid(doc_id, sid, "sentence has no root token"))?;

    // Every non-root token has exactly one head, so full reachability from the
    // root implies the head links form a tree.
    let mut children = vec![Vec::new(); n];
    for tok in &sentence.tokens {
        if let Some(h) = tok.head {
            children[h].push(tok.index);
        }
    }
    let mut visited = vec![false; n];
    let mut stack = vec![root];
    let mut count = 0;
    while let Some(i) = stack.pop() {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        count += 1;
        stack.extend(children[i].iter().copied());
    }
    if count != n {
        let orphan = visited.iter().position(|v| !v).unwrap();
        return Err(invalid(
            doc_id,
            sid,
            format!("head links do not form a tree: token {orphan} unreachable from root"),
        ));
    }

    for inst in &sentence.frames {
        validate_instance_structure(doc_id, sid, inst, n)?;
    }
    Ok(())
}

fn validate_instance_structure(doc_id: &str, sid: &str, inst: &FrameInstance, n: usize) -> Result<()> {
    let lu = &inst.lu;
    if inst.target_tokens.is_empty() {
        return Err(invalid(doc_id, sid, format!("instance of '{lu}' has an empty target")));
    }
    for pair in inst.target_tokens.windows(2) {
        if pair[0] >= pair[1] {
            return Err(invalid(
                doc_id,
                sid,
                format!("instance of '{lu}': target indices must be strictly ascending"),
            ));
        }
    }
    if *inst.target_tokens.last().unwrap() >= n {
        return Err(invalid(doc_id, sid, format!("instance of '{lu}': target index out of range")));
    }

    let target: HashSet<usize> = inst.target_tokens.iter().copied().collect();
    for role in &inst.roles {
        if role.start > role.end {
            return Err(invalid(
                doc_id,
                sid,
                format!("instance of '{lu}': role {} has start > end", role.fe),
            ));
        }
        if role.end >= n {
            return Err(invalid(
                doc_id,
                sid,
                format!("instance of '{lu}': role {} span out of range", role.fe),
            ));
        }
        if (role.start..=role.end).any(|i| target.contains(&i)) {
            return Err(invalid(
                doc_id,
                sid,
                format!("instance of '{lu}': role {} overlaps the target", role.fe),
            ));
        }
    }
    for (i, a) in inst.roles.iter().enumerate() {
        for b in &inst.roles[i + 1..] {
            if a.overlap(b) > 0 {
                return Err(invalid(
                    doc_id,
                    sid,
                    format!("instance of '{lu}': roles {} and {} overlap", a.fe, b.fe),
                ));
            }
        }
    }
    Ok(())
}

fn validate_instance_lexicon(
    doc_id: &str,
    sid: &str,
    inst: &FrameInstance,
    lexicon: &FrameLexicon,
) -> Result<()> {
    let lu = &inst.lu;
    let Some(frames) = lexicon.frames_for_lu(lu) else {
        return Err(invalid(doc_id, sid, format!("unknown lexical unit '{lu}'")));
    };
    if inst.is_other() {
        if !inst.roles.is_empty() {
            return Err(invalid(doc_id, sid, format!("instance of '{lu}': OTHER carries roles")));
        }
        return Ok(());
    }
    if !frames.contains(inst.frame.as_str()) {
        return Err(invalid(
            doc_id,
            sid,
            format!("frame '{}' is not a candidate of lexical unit '{lu}'", inst.frame),
        ));
    }
    let inventory = lexicon.fes_for_frame(&inst.frame).ok_or_else(|| {
        invalid(doc_id, sid, format!("frame '{}' has no FE inventory", inst.frame))
    })?;
    for role in &inst.roles {
        if !inventory.contains(role.fe.as_str()) {
            return Err(invalid(
                doc_id,
                sid,
                format!("FE '{}' is not in the inventory of frame '{}'", role.fe, inst.frame),
            ));
        }
    }
    Ok(())
}

/// The frame dictionary: lexical units with their candidate frames, and frames
/// with their frame-element inventories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLexicon {
    lu_to_frames: BTreeMap<String, BTreeSet<String>>,
    frame_to_fes: BTreeMap<String, BTreeSet<String>>,
}

/// Deserializes a JSON object into ordered pairs so duplicate keys can be
/// rejected instead of silently collapsed.
struct KeyedPairs<V>(Vec<(String, V)>);

impl<'de, V: Deserialize<'de>> Deserialize<'de> for KeyedPairs<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PairVisitor<V>(std::marker::PhantomData<V>);

        impl<'de, V: Deserialize<'de>> Visitor<'de> for PairVisitor<V> {
            type Value = KeyedPairs<V>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a json object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, V>()? {
                    pairs.push((k, v));
                }
                Ok(KeyedPairs(pairs))
            }
        }

        d.deserialize_map(PairVisitor(std::marker::PhantomData))
    }
}

#[derive(Deserialize)]
struct LexiconWire {
    lus: KeyedPairs<Vec<String>>,
    frames: KeyedPairs<Vec<String>>,
}

#[derive(Serialize)]
struct LexiconWireOut<'a> {
    lus: &'a BTreeMap<String, BTreeSet<String>>,
    frames: &'a BTreeMap<String, BTreeSet<String>>,
}

impl FrameLexicon {
    /// Builds a lexicon from (lu, frames) and (frame, fes) pairs, inserting
    /// the `OTHER` pseudo-frame and checking consistency.
    pub fn build(
        lus: Vec<(String, Vec<String>)>,
        frames: Vec<(String, Vec<String>)>,
    ) -> Result<FrameLexicon> {
        let mut frame_to_fes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (frame, fes) in frames {
            if frame_to_fes.contains_key(&frame) {
                return Err(Error::Lexicon(format!("duplicate frame entry '{frame}'")));
            }
            if frame == OTHER_FRAME && !fes.is_empty() {
                return Err(Error::Lexicon("the OTHER pseudo-frame must have an empty FE inventory".into()));
            }
            frame_to_fes.insert(frame, fes.into_iter().collect());
        }
        frame_to_fes.entry(OTHER_FRAME.to_string()).or_default();

        let mut lu_to_frames: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (lu, frames) in lus {
            if lu_to_frames.contains_key(&lu) {
                return Err(Error::Lexicon(format!("duplicate lexical-unit entry '{lu}'")));
            }
            if lu.trim().is_empty() {
                return Err(Error::Lexicon("empty lexical-unit name".into()));
            }
            for frame in &frames {
                if !frame_to_fes.contains_key(frame) {
                    return Err(Error::Lexicon(format!(
                        "lexical unit '{lu}' references undeclared frame '{frame}'"
                    )));
                }
            }
            lu_to_frames.insert(lu, frames.into_iter().collect());
        }
        Ok(FrameLexicon { lu_to_frames, frame_to_fes })
    }

    pub fn parse_lexicon(path: impl AsRef<Path>) -> Result<FrameLexicon> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        FrameLexicon::from_json_reader(BufReader::new(file))
    }

    pub fn from_json_reader(r: impl Read) -> Result<FrameLexicon> {
        let wire: LexiconWire =
            serde_json::from_reader(r).map_err(|e| Error::Lexicon(e.to_string()))?;
        FrameLexicon::build(wire.lus.0, wire.frames.0)
    }

    pub fn write_to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.canonical_bytes();
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Canonical serialization (sorted keys); also the hashing input for
    /// model registries.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let wire = LexiconWireOut { lus: &self.lu_to_frames, frames: &self.frame_to_fes };
        let mut bytes = serde_json::to_vec_pretty(&wire).expect("lexicon serialization");
        bytes.push(b'\n');
        bytes
    }

    pub fn lus(&self) -> impl Iterator<Item = &str> {
        self.lu_to_frames.keys().map(|s| s.as_str())
    }

    pub fn lu_count(&self) -> usize {
        self.lu_to_frames.len()
    }

    pub fn contains_lu(&self, lu: &str) -> bool {
        self.lu_to_frames.contains_key(lu)
    }

    /// Candidate frames of an LU, excluding the implicit `OTHER`.
    pub fn frames_for_lu(&self, lu: &str) -> Option<&BTreeSet<String>> {
        self.lu_to_frames.get(lu)
    }

    pub fn fes_for_frame(&self, frame: &str) -> Option<&BTreeSet<String>> {
        self.frame_to_fes.get(frame)
    }

    pub fn frames(&self) -> impl Iterator<Item = &str> {
        self.frame_to_fes.keys().map(|s| s.as_str())
    }
}

/// A candidate target: an LU whose lemma pattern matches at some position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LuOccurrence {
    pub lu: String,
    pub target_tokens: Vec<usize>,
}

/// Finds every lexical-unit occurrence in a sentence by lemma matching.
///
/// Single-token LUs match on lemma equality; multiword LUs (whitespace-split
/// names) match contiguous lemma sequences. Overlapping occurrences of
/// distinct LUs are all returned, ordered by start index then LU name.
pub fn iter_lu_occurrences(sentence: &Sentence, lexicon: &FrameLexicon) -> Vec<LuOccurrence> {
    let lemmas: Vec<&str> = sentence.tokens.iter().map(|t| t.lemma.as_str()).collect();
    let mut found = Vec::new();
    for lu in lexicon.lus() {
        let pattern: Vec<&str> = lu.split_whitespace().collect();
        if pattern.is_empty() || pattern.len() > lemmas.len() {
            continue;
        }
        for start in 0..=(lemmas.len() - pattern.len()) {
            if lemmas[start..start + pattern.len()] == pattern[..] {
                found.push(LuOccurrence {
                    lu: lu.to_string(),
                    target_tokens: (start..start + pattern.len()).collect(),
                });
            }
        }
    }
    found.sort_by(|a, b| {
        (a.target_tokens[0], a.lu.as_str()).cmp(&(b.target_tokens[0], b.lu.as_str()))
    });
    found
}


#[cfg(test)]
mod tests {
    use super::test_fixtures::*;
    use super::*;

    fn parse_str(data: &str) -> Result<Corpus> {
        Corpus::from_reader(std::io::Cursor::new(data.as_bytes()), "test.jsonl")
    }

    const GOOD_LINE: &str = r#"{"doc_id":"d1","source":"WGM","sentences":[{"sent_id":"s1","tokens":[{"form":"Pierre","lemma":"pierre","pos":"PROPN","head":1,"deprel":"suj"},{"form":"dort","lemma":"dormir","pos":"VERB","head":-1,"deprel":"root"}],"frames":[]}]}"#;

    #[test]
    fn parses_minimal_document() {
        let corpus = parse_str(GOOD_LINE).unwrap();
        assert_eq!(corpus.documents.len(), 1);
        let sent = &corpus.documents[0].sentences[0];
        assert_eq!(sent.doc_id, "d1");
        assert_eq!(sent.tokens[0].index, 0);
        assert_eq!(sent.tokens[0].head, Some(1));
        assert_eq!(sent.tokens[1].head, None);
        assert_eq!(sent.root(), Some(1));
    }

    #[test]
    fn roundtrips_through_jsonl() {
        let corpus = one_doc_corpus();
        let mut buf = Vec::new();
        corpus.write_jsonl(&mut buf).unwrap();
        let reparsed = Corpus::from_reader(std::io::Cursor::new(&buf), "mem.jsonl").unwrap();
        assert_eq!(corpus, reparsed);
    }

    #[test]
    fn skips_blank_lines() {
        let data = format!("{GOOD_LINE}\n\n{}\n", GOOD_LINE.replace("\"d1\"", "\"d2\""));
        let corpus = parse_str(&data).unwrap();
        assert_eq!(corpus.documents.len(), 2);
    }

    #[test]
    fn rejects_head_below_minus_one() {
        let bad = GOOD_LINE.replace("\"head\":1", "\"head\":-2");
        let err = parse_str(&bad).unwrap_err();
        assert!(matches!(err, Error::Json { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_head_out_of_range() {
        let bad = GOOD_LINE.replace("\"head\":1", "\"head\":7");
        let err = parse_str(&bad).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn rejects_multiple_roots() {
        let bad = GOOD_LINE.replace("\"head\":1", "\"head\":-1");
        let err = parse_str(&bad).unwrap_err();
        assert!(err.to_string().contains("multiple roots"), "{err}");
    }

    #[test]
    fn rejects_cycles() {
        // Tokens 0 and 1 point at each other; token 2 is the root.
        let data = r#"{"doc_id":"d1","source":"S","sentences":[{"sent_id":"s1","tokens":[{"form":"a","lemma":"a","pos":"X","head":1,"deprel":"dep"},{"form":"b","lemma":"b","pos":"X","head":0,"deprel":"dep"},{"form":"c","lemma":"c","pos":"X","head":-1,"deprel":"root"}],"frames":[]}]}"#;
        let err = parse_str(data).unwrap_err();
        assert!(err.to_string().contains("do not form a tree"), "{err}");
    }

    #[test]
    fn rejects_duplicate_doc_ids() {
        let data = format!("{GOOD_LINE}\n{GOOD_LINE}");
        let err = parse_str(&data).unwrap_err();
        assert!(err.to_string().contains("duplicate doc_id"), "{err}");
    }

    fn corpus_with_instance(mutate: impl FnOnce(&mut FrameInstance)) -> Result<Corpus> {
        let mut corpus = one_doc_corpus();
        mutate(&mut corpus.documents[0].sentences[0].frames[0]);
        let mut buf = Vec::new();
        corpus.write_jsonl(&mut buf).unwrap();
        Corpus::from_reader(std::io::Cursor::new(&buf), "mem.jsonl")
    }

    #[test]
    fn rejects_empty_target() {
        let err = corpus_with_instance(|i| i.target_tokens.clear()).unwrap_err();
        assert!(err.to_string().contains("empty target"), "{err}");
    }

    #[test]
    fn rejects_descending_target() {
        let err = corpus_with_instance(|i| i.target_tokens = vec![3, 3]).unwrap_err();
        assert!(err.to_string().contains("strictly ascending"), "{err}");
    }

    #[test]
    fn rejects_role_start_after_end() {
        let err = corpus_with_instance(|i| i.roles[0] = RoleSpan::new("Cognizer", 2, 1)).unwrap_err();
        assert!(err.to_string().contains("start > end"), "{err}");
    }

    #[test]
    fn rejects_role_span_out_of_range() {
        let err = corpus_with_instance(|i| i.roles[0] = RoleSpan::new("Cognizer", 5, 9)).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn rejects_role_overlapping_target() {
        let err = corpus_with_instance(|i| i.roles[0] = RoleSpan::new("Cognizer", 2, 3)).unwrap_err();
        assert!(err.to_string().contains("overlaps the target"), "{err}");
    }

    #[test]
    fn rejects_overlapping_roles() {
        let err = corpus_with_instance(|i| {
            i.roles = vec![RoleSpan::new("Cognizer", 0, 1), RoleSpan::new("Time", 1, 1)]
        })
        .unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn lexicon_checks_catch_unknown_lu_frame_and_fe() {
        let lexicon = small_lexicon();

        let corpus = one_doc_corpus();
        corpus.validate_with_lexicon(&lexicon).unwrap();

        let mut c = one_doc_corpus();
        c.documents[0].sentences[0].frames[0].lu = "inconnu".into();
        assert!(c.validate_with_lexicon(&lexicon).unwrap_err().to_string().contains("unknown lexical unit"));

        let mut c = one_doc_corpus();
        c.documents[0].sentences[0].frames[0].frame = "Attack".into();
        assert!(c.validate_with_lexicon(&lexicon).unwrap_err().to_string().contains("not a candidate"));

        let mut c = one_doc_corpus();
        c.documents[0].sentences[0].frames[0].roles[0].fe = "Assailant".into();
        assert!(c.validate_with_lexicon(&lexicon).unwrap_err().to_string().contains("not in the inventory"));

        let mut c = one_doc_corpus();
        c.documents[0].sentences[0].frames[0].frame = OTHER_FRAME.into();
        assert!(c.validate_with_lexicon(&lexicon).unwrap_err().to_string().contains("OTHER carries roles"));

        let mut c = one_doc_corpus();
        let inst = &mut c.documents[0].sentences[0].frames[0];
        inst.frame = OTHER_FRAME.into();
        inst.roles.clear();
        c.validate_with_lexicon(&lexicon).unwrap();
    }

    #[test]
    fn lexicon_parses_and_inserts_other() {
        let data = r#"{"lus":{"découvrir":["Becoming_aware"]},"frames":{"Becoming_aware":["Cognizer","Phenomenon"]}}"#;
        let lex = FrameLexicon::from_json_reader(data.as_bytes()).unwrap();
        assert!(lex.fes_for_frame(OTHER_FRAME).unwrap().is_empty());
        assert_eq!(lex.frames_for_lu("découvrir").unwrap().len(), 1);
    }

    #[test]
    fn lexicon_rejects_duplicate_lu() {
        let data = r#"{"lus":{"voir":["A"],"voir":["A"]},"frames":{"A":[]}}"#;
        let err = FrameLexicon::from_json_reader(data.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate lexical-unit"), "{err}");
    }

    #[test]
    fn lexicon_rejects_undeclared_frame() {
        let data = r#"{"lus":{"voir":["Absent"]},"frames":{"A":[]}}"#;
        let err = FrameLexicon::from_json_reader(data.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("undeclared frame"), "{err}");
    }

    #[test]
    fn lexicon_rejects_other_with_inventory() {
        let data = r#"{"lus":{},"frames":{"OTHER":["X"]}}"#;
        let err = FrameLexicon::from_json_reader(data.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("empty FE inventory"), "{err}");
    }

    #[test]
    fn canonical_bytes_are_stable() {
        let a = small_lexicon().canonical_bytes();
        let b = small_lexicon().canonical_bytes();
        assert_eq!(a, b);
    }

    #[test]
    fn finds_single_token_occurrences() {
        let lexicon = small_lexicon();
        let sent = discovery_sentence();
        let occ = iter_lu_occurrences(&sent, &lexicon);
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].lu, "découvrir");
        assert_eq!(occ[0].target_tokens, vec![3]);
    }

    #[test]
    fn finds_repeated_and_ordered_occurrences() {
        let lexicon = small_lexicon();
        let sent = sentence(
            "s1",
            vec![
                tok("attaque", "NOUN", Some(1), "suj"),
                tok("précéda", "VERB", None, "root"),
                tok("l'", "DET", Some(3), "det"),
                tok("attaque", "NOUN", Some(1), "obj"),
            ],
            vec![],
        );
        let occ = iter_lu_occurrences(&sent, &lexicon);
        assert_eq!(occ.len(), 2);
        assert_eq!(occ[0].target_tokens, vec![0]);
        assert_eq!(occ[1].target_tokens, vec![3]);
    }

    #[test]
    fn finds_multiword_occurrences() {
        let lexicon = FrameLexicon::build(
            vec![("prendre part".into(), vec!["Participation".into()])],
            vec![("Participation".into(), vec!["Participant".into()])],
        )
        .unwrap();
        let sent = sentence(
            "s1",
            vec![
                tok("Il", "PRON", Some(1), "suj"),
                tok("prendre", "VERB", None, "root"),
                tok("part", "NOUN", Some(1), "obj"),
                tok("au", "ADP", Some(1), "mod"),
                tok("combat", "NOUN", Some(3), "pobj"),
            ],
            vec![],
        );
        let occ = iter_lu_occurrences(&sent, &lexicon);
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].target_tokens, vec![1, 2]);
    }

    #[test]
    fn multiword_pattern_longer_than_sentence_is_skipped() {
        let lexicon = FrameLexicon::build(
            vec![("a b c".into(), vec![])],
            vec![],
        )
        .unwrap();
        let sent = sentence("s1", vec![tok("a", "X", None, "root")], vec![]);
        assert!(iter_lu_occurrences(&sent, &lexicon).is_empty());
    }
}
