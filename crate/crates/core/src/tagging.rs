//! Label sets and the mapping between frame instances and label sequences.
//!
//! One label per token jointly encodes the frame decision and the role
//! segmentation: the first target token carries `T:frame`, further target
//! tokens carry `TI:frame`, role fillers carry `B-fe` / `I-fe`, and every
//! other token carries `O`. Decoding is total: any label sequence (e.g. a
//! Viterbi output) maps back to a frame instance, repairing orphan `I-fe`
//! labels into span starts and counting the repairs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::{FrameInstance, FrameLexicon, RoleSpan, OTHER_FRAME};
use crate::error::{Error, Result};

/// One joint frame/role label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Outside any target or role span.
    O,
    /// First target token of an occurrence evoking `frame`.
    Target(String),
    /// Non-initial target token of an occurrence evoking `frame`.
    TargetCont(String),
    /// First token of a role span filling `fe`.
    Begin(String),
    /// Non-initial token of a role span filling `fe`.
    Inside(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Label::O => f.write_str("O"),
            Label::Target(frame) => write!(f, "T:{frame}"),
            Label::TargetCont(frame) => write!(f, "TI:{frame}"),
            Label::Begin(fe) => write!(f, "B-{fe}"),
            Label::Inside(fe) => write!(f, "I-{fe}"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            Ok(Label::O)
        } else if let Some(f) = s.strip_prefix("TI:") {
            Ok(Label::TargetCont(f.to_string()))
        } else if let Some(f) = s.strip_prefix("T:") {
            Ok(Label::Target(f.to_string()))
        } else if let Some(e) = s.strip_prefix("B-") {
            Ok(Label::Begin(e.to_string()))
        } else if let Some(e) = s.strip_prefix("I-") {
            Ok(Label::Inside(e.to_string()))
        } else {
            Err(Error::Model(format!("unparseable label '{s}'")))
        }
    }
}

/// Sequence of label indices into a [`LabelSet`].
pub type LabelSequence = Vec<usize>;

/// The deterministic label inventory of one lexical unit's model:
/// `O` at index 0, then `T:`/`TI:` pairs for each candidate frame plus
/// `OTHER` in sorted order, then `B-`/`I-` pairs for each frame element in
/// the union of the candidate frames' inventories, in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    lu: String,
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
}

impl LabelSet {
    pub fn for_lu(lexicon: &FrameLexicon, lu: &str) -> Result<LabelSet> {
        let frames = lexicon
            .frames_for_lu(lu)
            .ok_or_else(|| Error::Lexicon(format!("unknown lexical unit '{lu}'")))?;
        let mut frame_names: Vec<&str> = frames.iter().map(String::as_str).collect();
        if !frame_names.contains(&OTHER_FRAME) {
            frame_names.push(OTHER_FRAME);
        }
        frame_names.sort_unstable();

        let mut fes: Vec<&str> = Vec::new();
        for frame in &frame_names {
            if let Some(inventory) = lexicon.fes_for_frame(frame) {
                fes.extend(inventory.iter().map(String::as_str));
            }
        }
        fes.sort_unstable();
        fes.dedup();

        let mut labels = vec![Label::O];
        for frame in &frame_names {
            labels.push(Label::Target(frame.to_string()));
            labels.push(Label::TargetCont(frame.to_string()));
        }
        for fe in &fes {
            labels.push(Label::Begin(fe.to_string()));
            labels.push(Label::Inside(fe.to_string()));
        }
        Ok(LabelSet::from_labels(lu.to_string(), labels))
    }

    /// Rebuilds a label set from rendered labels (model deserialization).
    pub fn from_rendered(lu: String, rendered: &[String]) -> Result<LabelSet> {
        if rendered.first().map(String::as_str) != Some("O") {
            return Err(Error::Model("label list must start with 'O'".into()));
        }
        let labels = rendered.iter().map(|s| s.parse()).collect::<Result<Vec<Label>>>()?;
        let set = LabelSet::from_labels(lu, labels);
        if set.index.len() != set.labels.len() {
            return Err(Error::Model("duplicate label in label list".into()));
        }
        Ok(set)
    }

    fn from_labels(lu: String, labels: Vec<Label>) -> LabelSet {
        let index = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        LabelSet { lu, labels, index }
    }

    pub fn lu(&self) -> &str {
        &self.lu
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, id: usize) -> &Label {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn id_of(&self, label: &Label) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Index of `O`; always 0.
    pub const OUTSIDE: usize = 0;
}

/// Encodes a gold instance as a label sequence over `sentence_len` tokens.
pub fn encode_labels(
    sentence_len: usize,
    instance: &FrameInstance,
    label_set: &LabelSet,
) -> Result<LabelSequence> {
    if instance.lu != label_set.lu() {
        return Err(Error::Encoding(format!(
            "instance of '{}' encoded with the label set of '{}'",
            instance.lu,
            label_set.lu()
        )));
    }
    let id = |label: &Label| {
        label_set
            .id_of(label)
            .ok_or_else(|| Error::Encoding(format!("label '{label}' not in the set of '{}'", label_set.lu())))
    };

    let mut seq = vec![LabelSet::OUTSIDE; sentence_len];
    let mut claim = |pos: usize, label: Label| -> Result<()> {
        if pos >= sentence_len {
            return Err(Error::Encoding(format!("position {pos} out of range")));
        }
        if seq[pos] != LabelSet::OUTSIDE {
            return Err(Error::Encoding(format!("conflicting labels at position {pos}")));
        }
        seq[pos] = id(&label)?;
        Ok(())
    };

    for (k, &t) in instance.target_tokens.iter().enumerate() {
        let label = if k == 0 {
            Label::Target(instance.frame.clone())
        } else {
            Label::TargetCont(instance.frame.clone())
        };
        claim(t, label)?;
    }
    for role in &instance.roles {
        claim(role.start, Label::Begin(role.fe.clone()))?;
        for pos in role.start + 1..=role.end {
            claim(pos, Label::Inside(role.fe.clone()))?;
        }
    }
    Ok(seq)
}

/// A decoded instance together with decoding diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub instance: FrameInstance,
    /// Orphan `I-fe` labels promoted to span starts.
    pub repaired_orphans: usize,
}

/// Decodes any label sequence into a frame instance for the given target.
///
/// The frame is read off the first target token's label; a non-target label
/// there means the occurrence is `OTHER` and all roles are discarded. Role
/// spans never include target tokens: a span reaching a target token ends
/// before it, and a continuation after it is repaired into a new span.
pub fn decode_labels(seq: &[usize], target_tokens: &[usize], label_set: &LabelSet) -> Decoded {
    let frame = match label_set.label(seq[target_tokens[0]]) {
        Label::Target(f) | Label::TargetCont(f) => f.clone(),
        _ => OTHER_FRAME.to_string(),
    };

    let mut instance = FrameInstance {
        lu: label_set.lu().to_string(),
        frame,
        target_tokens: target_tokens.to_vec(),
        roles: Vec::new(),
    };
    if instance.is_other() {
        return Decoded { instance, repaired_orphans: 0 };
    }

    let mut repaired = 0;
    let mut open: Option<(String, usize, usize)> = None;
    for (pos, &label_id) in seq.iter().enumerate() {
        if target_tokens.contains(&pos) {
            if let Some((fe, start, end)) = open.take() {
                instance.roles.push(RoleSpan::new(fe, start, end));
            }
            continue;
        }
        match label_set.label(label_id) {
            Label::Begin(fe) => {
                if let Some((fe, start, end)) = open.take() {
                    instance.roles.push(RoleSpan::new(fe, start, end));
                }
                open = Some((fe.clone(), pos, pos));
            }
            Label::Inside(fe) => match &mut open {
                Some((open_fe, _, end)) if open_fe == fe && *end + 1 == pos => *end = pos,
                _ => {
                    if let Some((fe, start, end)) = open.take() {
                        instance.roles.push(RoleSpan::new(fe, start, end));
                    }
                    open = Some((fe.clone(), pos, pos));
                    repaired += 1;
                }
            },
            _ => {
                if let Some((fe, start, end)) = open.take() {
                    instance.roles.push(RoleSpan::new(fe, start, end));
                }
            }
        }
    }
    if let Some((fe, start, end)) = open.take() {
        instance.roles.push(RoleSpan::new(fe, start, end));
    }
    Decoded { instance, repaired_orphans: repaired }
}

/// Drops role spans whose frame element is not in the selected frame's
/// inventory. An `OTHER` instance keeps no roles. Returns the filtered
/// instance and the dropped spans; idempotent.
pub fn filter_incompatible_roles(
    instance: &FrameInstance,
    lexicon: &FrameLexicon,
) -> Result<(FrameInstance, Vec<RoleSpan>)> {
    let inventory = lexicon
        .fes_for_frame(&instance.frame)
        .ok_or_else(|| Error::Lexicon(format!("unknown frame '{}'", instance.frame)))?;
    let mut kept = instance.clone();
    let mut dropped = Vec::new();
    kept.roles = Vec::new();
    for role in &instance.roles {
        if inventory.contains(role.fe.as_str()) {
            kept.roles.push(role.clone());
        } else {
            dropped.push(role.clone());
        }
    }
    Ok((kept, dropped))
}
