//! Frame-semantic analysis as joint sequence labeling.
//!
//! One linear-chain CRF is trained per lexical unit (LU). A single label
//! sequence over a sentence simultaneously disambiguates the frame evoked by
//! the LU occurrence (via `T:frame` / `TI:frame` labels on the target tokens)
//! and segments/labels the frame-element fillers (via `B-fe` / `I-fe` labels).
//!
//! The crate is organized bottom-up:
//!
//! * [`corpus`] — data model plus the JSON-lines corpus and lexicon readers;
//! * [`features`] — the five token feature families and the feature dictionary;
//! * [`tagging`] — label sets, encoding/decoding, and role-compatibility filtering;
//! * [`crf`] — inference (scores, partition, marginals, Viterbi) and training;
//! * [`optimize`] — the deterministic batch L-BFGS minimizer used by training;
//! * [`pipeline`] — per-LU model registries, corpus-level training and prediction;
//! * [`eval`] — the four-level scoring protocol, breakdowns and fold aggregation;
//! * [`experiments`] — document-intact fold planning, ablation and composition runs;
//! * [`synth`] — a deterministic synthetic corpus generator used by tests and demos.

pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod features;
pub mod optimize;
pub mod pipeline;
pub mod synth;
pub mod tagging;

pub use corpus::{Corpus, Document, FrameInstance, FrameLexicon, RoleSpan, Sentence, Token, OTHER_FRAME};
pub use error::Error;
pub use features::{FeatureConfig, FeatureDictionary, FeatureFamily, FeatureVector};
pub use tagging::{Label, LabelSet};
