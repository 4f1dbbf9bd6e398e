//! Token features relative to a target span, and the feature dictionary.
//!
//! Five feature families describe each token relative to the lexical-unit
//! target under analysis:
//!
//! * `lemma` — the token's lemma;
//! * `parent_lemma` — the lemma of its syntactic head (`ROOT` for the root);
//! * `pos` — the part-of-speech tag;
//! * `lin_dist` — signed token distance to the nearest target token
//!   (`0` inside the target), clipped to a configurable radius with
//!   `<-10` / `>+10` overflow buckets;
//! * `dep_path` — the dependency path from the token to the target head,
//!   rendered as `↑deprel` / `↓deprel` edges joined by `|` and simplified to
//!   the edges nearest the target with an explicit `…` truncation marker.
//!
//! Every enabled family is emitted once per window offset and namespaced as
//! `family[offset]=value`, e.g. `lemma[-1]=le` or `dep_path[0]=↑suj`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Lemma sentinel for the syntactic root's (absent) head.
pub const ROOT_LEMMA: &str = "ROOT";
/// Value sentinel for window positions before the first token.
pub const BOS_VALUE: &str = "_BOS_";
/// Value sentinel for window positions past the last token.
pub const EOS_VALUE: &str = "_EOS_";
/// Dictionary entry that unseen feature strings collapse to once frozen.
pub const UNK_FEATURE: &str = "<UNK>";
/// Id of [`UNK_FEATURE`]; always 0.
pub const UNK_ID: u32 = 0;

/// One of the five token feature families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFamily {
    Lemma,
    ParentLemma,
    Pos,
    LinDist,
    DepPath,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 5] = [
        FeatureFamily::Lemma,
        FeatureFamily::ParentLemma,
        FeatureFamily::Pos,
        FeatureFamily::LinDist,
        FeatureFamily::DepPath,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureFamily::Lemma => "lemma",
            FeatureFamily::ParentLemma => "parent_lemma",
            FeatureFamily::Pos => "pos",
            FeatureFamily::LinDist => "lin_dist",
            FeatureFamily::DepPath => "dep_path",
        }
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature family '{s}'")))
    }
}

/// Feature extraction settings shared by training and prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub families: Vec<FeatureFamily>,
    /// Window offsets each family is emitted at.
    pub window: Vec<i32>,
    /// Linear-distance clipping radius; `None` disables clipping.
    pub clip_distance: Option<u32>,
    /// Maximum number of dependency-path edges kept (nearest the target).
    pub max_path_len: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            families: FeatureFamily::ALL.to_vec(),
            window: vec![-1, 0, 1],
            clip_distance: Some(10),
            max_path_len: 2,
        }
    }
}

impl FeatureConfig {
    /// A default-config variant with a different family list.
    pub fn with_families(families: Vec<FeatureFamily>) -> Self {
        FeatureConfig { families, ..FeatureConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Config("at least one feature family is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &self.families {
            if !seen.insert(*f) {
                return Err(Error::Config(format!("feature family '{f}' listed twice")));
            }
        }
        if self.window.is_empty() {
            return Err(Error::Config("the window offset list is empty".into()));
        }
        if self.max_path_len == 0 {
            return Err(Error::Config("max_path_len must be at least 1".into()));
        }
        if self.clip_distance == Some(0) {
            return Err(Error::Config("clip_distance must be at least 1".into()));
        }
        Ok(())
    }
}

/// Signed distance from a token to the nearest target token; `0` inside the
/// target span.
pub fn linear_distance(token_idx: usize, target_tokens: &[usize]) -> i64 {
    let t = token_idx as i64;
    let mut best: Option<i64> = None;
    for &g in target_tokens {
        let d = t - g as i64;
        if d == 0 {
            return 0;
        }
        match best {
            Some(b) if b.abs() <= d.abs() => {}
            _ => best = Some(d),
        }
    }
    best.expect("target_tokens must be non-empty")
}

/// Syntactic head of a target span: the target token whose head lies outside
/// the span, or the first target token if none does.
pub fn target_head(sentence: &Sentence, target_tokens: &[usize]) -> usize {
    for &t in target_tokens {
        match sentence.tokens[t].head {
            None => return t,
            Some(h) if !target_tokens.contains(&h) => return t,
            Some(_) => {}
        }
    }
    target_tokens[0]
}

/// One edge of a dependency path, labeled by the child's relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEdge {
    /// `true` when the path ascends from child to parent.
    pub up: bool,
    pub deprel: String,
}

impl fmt::Display for PathEdge {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}{}", if self.up { '↑' } else { '↓' }, self.deprel)
    }
}

fn ancestor_chain(sentence: &Sentence, mut idx: usize) -> Vec<usize> {
    let mut chain = vec![idx];
    while let Some(h) = sentence.tokens[idx].head {
        chain.push(h);
        idx = h;
    }
    chain
}

/// The unique tree path from `token_idx` to `target_idx`, ordered from the
/// token end toward the target end: ascending edges to the lowest common
/// ancestor, then descending edges down to the target.
pub fn raw_dependency_path(sentence: &Sentence, token_idx: usize, target_idx: usize) -> Vec<PathEdge> {
    if token_idx == target_idx {
        return Vec::new();
    }
    let from_chain = ancestor_chain(sentence, token_idx);
    let to_chain = ancestor_chain(sentence, target_idx);
    let positions: HashMap<usize, usize> =
        from_chain.iter().enumerate().map(|(i, &n)| (n, i)).collect();

    let (lca_in_from, lca_in_to) = to_chain
        .iter()
        .enumerate()
        .find_map(|(j, n)| positions.get(n).map(|&i| (i, j)))
        .expect("two nodes of one tree always share an ancestor");

    let mut path = Vec::with_capacity(lca_in_from + lca_in_to);
    for &node in &from_chain[..lca_in_from] {
        path.push(PathEdge { up: true, deprel: sentence.tokens[node].deprel.clone() });
    }
    for &node in to_chain[..lca_in_to].iter().rev() {
        path.push(PathEdge { up: false, deprel: sentence.tokens[node].deprel.clone() });
    }
    path
}

/// Renders a path, keeping at most `max_len` edges nearest the target and
/// marking truncation explicitly. The empty path renders as `""`.
pub fn simplify_path(path: &[PathEdge], max_len: usize) -> String {
    if path.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    if path.len() > max_len {
        out.push('…');
        out.push('|');
    }
    let keep = &path[path.len().saturating_sub(max_len)..];
    for (i, edge) in keep.iter().enumerate() {
        if i > 0 {
            out.push('|');
        }
        out.push_str(&edge.to_string());
    }
    out
}

/// The five per-token values, computed relative to one target span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenFeatures {
    pub lemma: String,
    pub parent_lemma: String,
    pub pos: String,
    /// Unclipped signed distance; clipping applies when rendering the
    /// feature string.
    pub lin_dist: i64,
    /// Simplified path string; `""` iff the token is inside the target span.
    pub dep_path: String,
}

/// Computes [`TokenFeatures`] for every token of a sentence.
pub fn token_features(
    sentence: &Sentence,
    target_tokens: &[usize],
    config: &FeatureConfig,
) -> Vec<TokenFeatures> {
    let head = target_head(sentence, target_tokens);
    sentence
        .tokens
        .iter()
        .map(|tok| {
            let dep_path = if target_tokens.contains(&tok.index) {
                String::new()
            } else {
                simplify_path(
                    &raw_dependency_path(sentence, tok.index, head),
                    config.max_path_len,
                )
            };
            TokenFeatures {
                lemma: tok.lemma.clone(),
                parent_lemma: match tok.head {
                    Some(h) => sentence.tokens[h].lemma.clone(),
                    None => ROOT_LEMMA.to_string(),
                },
                pos: tok.pos.clone(),
                lin_dist: linear_distance(tok.index, target_tokens),
                dep_path,
            }
        })
        .collect()
}

fn lin_dist_value(d: i64, clip: Option<u32>) -> String {
    match clip {
        Some(c) if d < -(c as i64) => format!("<-{c}"),
        Some(c) if d > c as i64 => format!(">+{c}"),
        _ => d.to_string(),
    }
}

/// Namespaced feature strings per position: one string per enabled family per
/// window offset.
pub fn feature_strings(
    sentence: &Sentence,
    target_tokens: &[usize],
    config: &FeatureConfig,
) -> Vec<Vec<String>> {
    let per_token = token_features(sentence, target_tokens, config);
    let n = per_token.len() as i64;
    (0..per_token.len())
        .map(|t| {
            let mut strings = Vec::with_capacity(config.families.len() * config.window.len());
            for &family in &config.families {
                for &off in &config.window {
                    let p = t as i64 + off as i64;
                    let value = if p < 0 {
                        BOS_VALUE.to_string()
                    } else if p >= n {
                        EOS_VALUE.to_string()
                    } else {
                        let tf = &per_token[p as usize];
                        match family {
                            FeatureFamily::Lemma => tf.lemma.clone(),
                            FeatureFamily::ParentLemma => tf.parent_lemma.clone(),
                            FeatureFamily::Pos => tf.pos.clone(),
                            FeatureFamily::LinDist => lin_dist_value(tf.lin_dist, config.clip_distance),
                            FeatureFamily::DepPath => tf.dep_path.clone(),
                        }
                    };
                    strings.push(format!("{family}[{off}]={value}"));
                }
            }
            strings
        })
        .collect()
}

/// Injective string-to-id map. While unfrozen, [`FeatureDictionary::intern`]
/// grows the map; once frozen, unknown strings collapse to [`UNK_ID`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDictionary {
    names: Vec<String>,
    by_name: HashMap<String, u32>,
    frozen: bool,
}

impl Default for FeatureDictionary {
    fn default() -> Self {
        Self::new()
    }
}

impl FeatureDictionary {
    pub fn new() -> Self {
        let mut dict = FeatureDictionary { names: Vec::new(), by_name: HashMap::new(), frozen: false };
        dict.names.push(UNK_FEATURE.to_string());
        dict.by_name.insert(UNK_FEATURE.to_string(), UNK_ID);
        dict
    }

    /// Rebuilds a frozen dictionary from serialized names.
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        if names.first().map(String::as_str) != Some(UNK_FEATURE) {
            return Err(Error::Model(format!("feature list must start with '{UNK_FEATURE}'")));
        }
        let mut by_name = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if by_name.insert(name.clone(), i as u32).is_some() {
                return Err(Error::Model(format!("duplicate feature string '{name}'")));
            }
        }
        Ok(FeatureDictionary { names, by_name, frozen: true })
    }

    pub fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.by_name.get(s) {
            return id;
        }
        if self.frozen {
            return UNK_ID;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_string());
        self.by_name.insert(s.to_string(), id);
        id
    }

    /// Read-only lookup; unknown strings map to [`UNK_ID`].
    pub fn lookup(&self, s: &str) -> u32 {
        self.by_name.get(s).copied().unwrap_or(UNK_ID)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Per-position sets of feature ids for one (sentence, target) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub positions: Vec<Vec<u32>>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn from_ids(mut ids: Vec<Vec<u32>>) -> Self {
        for pos in &mut ids {
            pos.sort_unstable();
            pos.dedup();
        }
        FeatureVector { positions: ids }
    }
}

/// Extracts features and interns them, growing `dict` unless it is frozen.
pub fn extract_sequence_features(
    sentence: &Sentence,
    target_tokens: &[usize],
    config: &FeatureConfig,
    dict: &mut FeatureDictionary,
) -> FeatureVector {
    let ids = feature_strings(sentence, target_tokens, config)
        .into_iter()
        .map(|strings| strings.iter().map(|s| dict.intern(s)).collect())
        .collect();
    FeatureVector::from_ids(ids)
}

/// Extracts features against a frozen dictionary; unseen strings map to
/// [`UNK_ID`]. Usable concurrently.
pub fn extract_with_frozen(
    sentence: &Sentence,
    target_tokens: &[usize],
    config: &FeatureConfig,
    dict: &FeatureDictionary,
) -> FeatureVector {
    debug_assert!(dict.is_frozen());
    let ids = feature_strings(sentence, target_tokens, config)
        .into_iter()
        .map(|strings| strings.iter().map(|s| dict.lookup(s)).collect())
        .collect();
    FeatureVector::from_ids(ids)
}
