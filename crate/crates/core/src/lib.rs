//! Weakly supervised named entity recognition by reference-set augmented
//! bootstrapping.
//!
//! A tagger is trained on a small fully labeled seed, then used to soft-label
//! a large unlabeled corpus. Gazetteer matches from a reference set of entity
//! names override the model's predictions with one-hot rows, and the model is
//! fine-tuned on seed plus corpus for a fixed number of rounds. A final
//! sequence-level model is trained on the hardened corpus labels.
//!
//! Modules:
//! - [`corpus`]: tokens, BIO tag sets, hard/soft labelings, CoNLL and soft-label files.
//! - [`refset`]: reference sets, name filtering and gazetteer matching policies.
//! - [`tagger`]: linear-chain log-linear tagger with marginal and Viterbi decoding.
//! - [`bootstrap`]: the iterative relabel/fine-tune loop.
//! - [`eval`]: entity-level scoring, synthetic corpora and the experiment grid.

pub mod bootstrap;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod refset;
pub mod tagger;

pub use corpus::{
    Dataset, DatasetKind, EntitySpan, HardLabeling, Labeling, Provenance, Sentence, SoftLabeling,
    TagSet, Token,
};
pub use error::{Error, Result};
pub use refset::{MatchPolicy, RefMatch, ReferenceSet};
pub use tagger::{ObjectiveMode, Tagger, TaggerModel, TrainConfig};
