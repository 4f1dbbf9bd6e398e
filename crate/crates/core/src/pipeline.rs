//! Per-lexical-unit training and full-sentence prediction.
//!
//! Training builds one CRF per lexical unit from that unit's gold instances
//! only. Prediction enumerates candidate targets by lexicon lemma matching,
//! applies the matching model per occurrence, decodes the label sequence,
//! and drops roles the predicted frame cannot carry.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{iter_lu_occurrences, Corpus, Document, FrameInstance, FrameLexicon, Sentence};
use crate::crf::{self, CrfModel, Hyper, TrainInstance};
use crate::error::{Error, Result};
use crate::features::{extract_sequence_features, extract_with_frozen, FeatureConfig, FeatureDictionary};
use crate::tagging::{decode_labels, encode_labels, filter_incompatible_roles, LabelSet};

/// Counters accumulated while predicting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictDiagnostics {
    /// Role spans removed because the decoded frame cannot carry them.
    pub dropped_roles: usize,
    /// `I-` labels without a matching open span, repaired to span starts.
    pub repaired_orphans: usize,
    /// Lexical-unit occurrences with no registered model.
    pub skipped_occurrences: usize,
}

impl PredictDiagnostics {
    fn absorb(&mut self, other: PredictDiagnostics) {
        self.dropped_roles += other.dropped_roles;
        self.repaired_orphans += other.repaired_orphans;
        self.skipped_occurrences += other.skipped_occurrences;
    }
}

/// All models trained from one corpus against one lexicon.
#[derive(Debug, Clone)]
pub struct ModelRegistry {
    models: BTreeMap<String, CrfModel>,
    lexicon_hash: String,
    config: FeatureConfig,
    skipped_lus: Vec<String>,
}

/// Hex SHA-256 of the lexicon's canonical serialization.
pub fn lexicon_sha256(lexicon: &FrameLexicon) -> String {
    let mut hasher = Sha256::new();
    hasher.update(lexicon.canonical_bytes());
    hex_digest(hasher)
}

fn hex_digest(hasher: Sha256) -> String {
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Trains one model per lexical unit that has at least one gold instance.
///
/// Units in the lexicon without instances are recorded as skipped, not
/// errors. Per-unit jobs run concurrently; each job is deterministic, so the
/// registry is identical for any thread count.
pub fn train_all(
    corpus: &Corpus,
    lexicon: &FrameLexicon,
    config: &FeatureConfig,
    hyper: &Hyper,
) -> Result<ModelRegistry> {
    config.validate()?;
    hyper.validate()?;
    let mut by_lu: BTreeMap<&str, Vec<(&Sentence, &FrameInstance)>> =
        lexicon.lus().map(|lu| (lu, Vec::new())).collect();
    for sentence in corpus.sentences() {
        for instance in &sentence.frames {
            by_lu
                .get_mut(instance.lu.as_str())
                .ok_or_else(|| Error::Lexicon(format!("instance of unknown LU '{}'", instance.lu)))?
                .push((sentence, instance));
        }
    }

    let mut skipped_lus = Vec::new();
    let mut attested: Vec<(&str, Vec<(&Sentence, &FrameInstance)>)> = Vec::new();
    for (lu, gold) in by_lu {
        if gold.is_empty() {
            skipped_lus.push(lu.to_string());
        } else {
            attested.push((lu, gold));
        }
    }

    let trained: Vec<CrfModel> = attested
        .into_par_iter()
        .map(|(lu, gold)| train_one(lu, &gold, lexicon, config, hyper))
        .collect::<Result<_>>()?;

    Ok(ModelRegistry {
        models: trained.into_iter().map(|m| (m.lu().to_string(), m)).collect(),
        lexicon_hash: lexicon_sha256(lexicon),
        config: config.clone(),
        skipped_lus,
    })
}

fn train_one(
    lu: &str,
    gold: &[(&Sentence, &FrameInstance)],
    lexicon: &FrameLexicon,
    config: &FeatureConfig,
    hyper: &Hyper,
) -> Result<CrfModel> {
    let label_set = LabelSet::for_lu(lexicon, lu)?;
    let mut dict = FeatureDictionary::new();
    let mut instances = Vec::with_capacity(gold.len());
    for (sentence, instance) in gold {
        let features = extract_sequence_features(sentence, &instance.target_tokens, config, &mut dict);
        let labels = encode_labels(sentence.len(), instance, &label_set)?;
        instances.push(TrainInstance { features, labels });
    }
    crf::train(&instances, label_set, dict, config.clone(), hyper)
}

impl ModelRegistry {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn get(&self, lu: &str) -> Option<&CrfModel> {
        self.models.get(lu)
    }

    pub fn lus(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }

    /// Lexicon units that had no training instances and thus no model.
    pub fn skipped_lus(&self) -> &[String] {
        &self.skipped_lus
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn lexicon_hash(&self) -> &str {
        &self.lexicon_hash
    }

    /// Fails when `lexicon` is not the one the registry was trained against.
    pub fn check_lexicon(&self, lexicon: &FrameLexicon) -> Result<()> {
        let hash = lexicon_sha256(lexicon);
        if hash != self.lexicon_hash {
            return Err(Error::Model(format!(
                "lexicon hash {hash} does not match the registry's {}",
                self.lexicon_hash
            )));
        }
        Ok(())
    }
}

/// Predicts every registered lexical-unit occurrence in one sentence.
///
/// Occurrences of units without a model are skipped and counted. Returned
/// instances never carry a `(frame, role)` pair outside the lexicon, and
/// instances decoded as the catch-all frame carry no roles.
pub fn predict_sentence(
    sentence: &Sentence,
    registry: &ModelRegistry,
    lexicon: &FrameLexicon,
) -> Result<(Vec<FrameInstance>, PredictDiagnostics)> {
    let mut out = Vec::new();
    let mut diag = PredictDiagnostics::default();
    for occ in iter_lu_occurrences(sentence, lexicon) {
        let Some(model) = registry.get(&occ.lu) else {
            diag.skipped_occurrences += 1;
            continue;
        };
        let features = extract_with_frozen(sentence, &occ.target_tokens, &model.config, &model.dict);
        let (path, _) = crf::viterbi_decode(&model.params, &features);
        let decoded = decode_labels(&path, &occ.target_tokens, &model.label_set);
        diag.repaired_orphans += decoded.repaired_orphans;
        let (kept, dropped) = filter_incompatible_roles(&decoded.instance, lexicon)?;
        diag.dropped_roles += dropped.len();
        out.push(kept);
    }
    Ok((out, diag))
}

/// Predicts a whole corpus, mirroring its document and sentence layout.
///
/// Sentences are processed concurrently and reassembled in corpus order, so
/// the output is identical for any degree of parallelism.
pub fn predict_corpus(
    corpus: &Corpus,
    registry: &ModelRegistry,
    lexicon: &FrameLexicon,
) -> Result<(Corpus, PredictDiagnostics)> {
    let documents: Vec<(Document, PredictDiagnostics)> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let predicted: Vec<(Sentence, PredictDiagnostics)> = doc
                .sentences
                .par_iter()
                .map(|sentence| {
                    let (frames, diag) = predict_sentence(sentence, registry, lexicon)?;
                    let mut s = sentence.clone();
                    s.frames = frames;
                    Ok((s, diag))
                })
                .collect::<Result<_>>()?;
            let mut diag = PredictDiagnostics::default();
            let mut sentences = Vec::with_capacity(predicted.len());
            for (s, d) in predicted {
                diag.absorb(d);
                sentences.push(s);
            }
            Ok((
                Document { doc_id: doc.doc_id.clone(), source: doc.source.clone(), sentences },
                diag,
            ))
        })
        .collect::<Result<_>>()?;

    let mut diag = PredictDiagnostics::default();
    let mut out = Vec::with_capacity(documents.len());
    for (doc, d) in documents {
        diag.absorb(d);
        out.push(doc);
    }
    Ok((Corpus { documents: out }, diag))
}

/// Predicts a corpus and writes the result in corpus JSON-lines format.
pub fn predict_corpus_to_path(
    corpus: &Corpus,
    registry: &ModelRegistry,
    lexicon: &FrameLexicon,
    out_path: &Path,
) -> Result<PredictDiagnostics> {
    let (predicted, diag) = predict_corpus(corpus, registry, lexicon)?;
    predicted.write_to_path(out_path)?;
    Ok(diag)
}

// --- registry persistence --------------------------------------------------

pub const REGISTRY_VERSION: u32 = 1;
const REGISTRY_FILE: &str = "registry.json";

#[derive(Serialize, Deserialize)]
struct RegistryWire {
    version: u32,
    lexicon_sha256: String,
    feature_config: FeatureConfig,
    lus: Vec<String>,
    skipped_lus: Vec<String>,
    /// LU name → model file name within the registry directory.
    models: BTreeMap<String, String>,
}

/// Maps an LU name to a safe file stem; distinct LUs that sanitize to the
/// same stem get numeric suffixes (deterministic given sorted iteration).
fn model_file_names<'a>(lus: impl Iterator<Item = &'a str>) -> BTreeMap<String, String> {
    let mut taken: BTreeMap<String, usize> = BTreeMap::new();
    let mut names = BTreeMap::new();
    for lu in lus {
        let mut stem: String = lu
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
            .collect();
        if stem.is_empty() {
            stem.push_str("lu");
        }
        let n = taken.entry(stem.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            stem = format!("{stem}-{n}");
        }
        names.insert(lu.to_string(), format!("{stem}.model.json"));
    }
    names
}

impl ModelRegistry {
    /// Writes one model file per LU plus `registry.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let names = model_file_names(self.models.keys().map(String::as_str));
        for (lu, model) in &self.models {
            let path = dir.join(&names[lu]);
            let bytes = model.to_json_bytes()?;
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        let wire = RegistryWire {
            version: REGISTRY_VERSION,
            lexicon_sha256: self.lexicon_hash.clone(),
            feature_config: self.config.clone(),
            lus: self.models.keys().cloned().collect(),
            skipped_lus: self.skipped_lus.clone(),
            models: names,
        };
        let path = dir.join(REGISTRY_FILE);
        let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let bytes = serde_json::to_vec_pretty(&wire).map_err(|e| Error::Model(e.to_string()))?;
        file.write_all(&bytes).map_err(|e| Error::io(&path, e))?;
        file.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    /// Loads a saved registry, checking version, per-model identity, and
    /// feature-config agreement across models.
    pub fn load(dir: &Path) -> Result<ModelRegistry> {
        let reg_path = dir.join(REGISTRY_FILE);
        let bytes = fs::read(&reg_path).map_err(|e| Error::io(&reg_path, e))?;
        let wire: RegistryWire =
            serde_json::from_slice(&bytes).map_err(|e| Error::Model(format!("{}: {e}", reg_path.display())))?;
        if wire.version != REGISTRY_VERSION {
            return Err(Error::Model(format!(
                "unsupported registry version {} (expected {REGISTRY_VERSION})",
                wire.version
            )));
        }
        wire.feature_config.validate()?;
        if wire.lus.iter().collect::<std::collections::BTreeSet<_>>()
            != wire.models.keys().collect()
        {
            return Err(Error::Model("registry LU list disagrees with its model map".into()));
        }
        let mut models = BTreeMap::new();
        for (lu, file) in &wire.models {
            let path = dir.join(file);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let model = CrfModel::from_json_bytes(&bytes)?;
            if model.lu() != lu {
                return Err(Error::Model(format!(
                    "model file {file} holds '{}' but the registry maps it to '{lu}'",
                    model.lu()
                )));
            }
            if model.config != wire.feature_config {
                return Err(Error::Model(format!(
                    "model for '{lu}' was trained with a different feature configuration"
                )));
            }
            models.insert(lu.clone(), model);
        }
        Ok(ModelRegistry {
            models,
            lexicon_hash: wire.lexicon_sha256,
            config: wire.feature_config,
            skipped_lus: wire.skipped_lus,
        })
    }
}
