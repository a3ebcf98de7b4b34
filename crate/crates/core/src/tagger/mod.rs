//! Sequence taggers.
//!
//! [`TaggerModel`] is a feature-based linear-chain model. Its soft output is
//! the forward-backward posterior marginal per token; its hard output is
//! the Viterbi path. Training minimizes either per-token cross-entropy
//! against soft targets ([`ObjectiveMode::Marginal`]) or the sequence
//! negative log-likelihood of hard labels ([`ObjectiveMode::Sequence`]).

mod features;
pub mod inference;
mod model;
mod train;

use crate::corpus::{HardLabeling, Sentence, SoftLabeling, TagSet};

pub use crate::corpus::harden;
pub use features::{word_shape, FeatureConfig, FeatureDict};
pub use model::TaggerModel;
pub use train::{objective, objective_gradient, train, ObjectiveMode, TrainConfig};

/// Prediction interface shared by tagger implementations.
pub trait Tagger: Sync {
    fn tag_set(&self) -> &TagSet;

    /// Per-token tag distributions, provenance `PREDICTED`.
    fn predict_soft(&self, sentence: &Sentence) -> SoftLabeling;

    /// Most probable tag sequence.
    fn predict_hard(&self, sentence: &Sentence) -> HardLabeling;
}
