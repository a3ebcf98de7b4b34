//! Iterative augmented bootstrapping.
//!
//! `M_0` is trained on the seed alone. Round `i` relabels the corpus with
//! `M_{i-1}`'s soft predictions, pins every reference-set match to a one-hot
//! BIO row, and fine-tunes `M_{i-1}` on seed plus relabeled corpus. After
//! `K` rounds, [`finalize`] hardens the last relabeling and trains a fresh
//! sequence-level model on it.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::{Dataset, DatasetKind, Labeling, Provenance, SoftLabeling};
use crate::error::{Error, Result};
use crate::eval::{evaluate, Decode, EvalReport};
use crate::refset::{find_matches, MatchPolicy, RefMatch, ReferenceSet};
use crate::tagger::{harden, train, ObjectiveMode, Tagger, TaggerModel, TrainConfig};

#[derive(Clone, Debug)]
pub struct BootstrapConfig {
    /// Number of relabel/fine-tune rounds (`K`).
    pub iterations: usize,
    /// Optimization settings for `M_0` and every fine-tuning round.
    pub train: TrainConfig,
    /// Retrain a sequence-level model on the hardened final labeling.
    pub final_retrain: bool,
    /// Filtered with `policy` before matching.
    pub reference: Option<ReferenceSet>,
    pub policy: MatchPolicy,
    /// Additional pinned spans, applied after reference matches.
    pub extra_pins: Vec<RefMatch>,
    /// Scored after every round when present.
    pub held_out: Option<Dataset>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            train: TrainConfig::default(),
            final_retrain: true,
            reference: None,
            policy: MatchPolicy::default(),
            extra_pins: Vec::new(),
            held_out: None,
        }
    }
}

impl BootstrapConfig {
    /// Reference-set matches on `corpus` plus the extra pins. The corpus is
    /// static, so this is computed once per run.
    pub fn pins(&self, corpus: &Dataset) -> Vec<RefMatch> {
        let mut pins = match &self.reference {
            Some(r) => find_matches(corpus, &r.filter(&self.policy), &self.policy),
            None => Vec::new(),
        };
        pins.extend(self.extra_pins.iter().cloned());
        pins
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub checkpoint: String,
    /// Reference-pinned corpus tokens in the data this model was trained on.
    pub pinned_tokens: usize,
    /// Mean entropy (nats) of the predicted corpus rows this model was
    /// trained on; 0 for the seed-only model.
    pub mean_entropy: f64,
    pub metrics: Option<EvalReport>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn f1_series(&self) -> Vec<Option<f64>> {
        self.records
            .iter()
            .map(|r| r.metrics.map(|m| m.f1))
            .collect()
    }

    /// `iter  pinned_token_count  mean_entropy  [precision recall f1]`, with
    /// scores as two-decimal percentages.
    pub fn to_tsv(&self) -> String {
        let with_metrics = self.records.iter().any(|r| r.metrics.is_some());
        let mut out = String::from("iter\tpinned_token_count\tmean_entropy");
        if with_metrics {
            out.push_str("\tprecision\trecall\tf1");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{}\t{}\t{:.6}",
                r.iteration, r.pinned_tokens, r.mean_entropy
            );
            if with_metrics {
                match r.metrics {
                    Some(m) => {
                        let _ = write!(
                            out,
                            "\t{:.2}\t{:.2}\t{:.2}",
                            100.0 * m.precision,
                            100.0 * m.recall,
                            100.0 * m.f1
                        );
                    }
                    None => out.push_str("\t\t\t"),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn checkpoint_name(iteration: usize) -> String {
    format!("model-iter-{iteration:03}.json")
}

/// Soft-labels `corpus` with `model`, then overwrites every token covered
/// by a match with a one-hot row (`B-t` on the first token, `I-t` after).
pub fn relabel<T: Tagger + ?Sized>(
    corpus: &Dataset,
    model: &T,
    matches: &[RefMatch],
) -> Result<Dataset> {
    let tags = model.tag_set();
    if &corpus.tags != tags {
        return Err(Error::ModelTagSetMismatch {
            expected: tags.to_string(),
            found: corpus.tags.to_string(),
        });
    }
    let mut labels: Vec<SoftLabeling> = corpus
        .sentences
        .par_iter()
        .map(|s| model.predict_soft(s))
        .collect();
    for m in matches {
        let t = tags
            .type_index(&m.entity_type)
            .ok_or_else(|| Error::ModelTagSetMismatch {
                expected: tags.to_string(),
                found: m.entity_type.clone(),
            })?;
        let n = corpus.sentences.get(m.sentence).map_or(0, |s| s.len());
        if m.first > m.last || m.last >= n {
            return Err(Error::SpanOutOfBounds {
                first: m.first,
                last: m.last,
                n_tokens: n,
            });
        }
        let row = &mut labels[m.sentence];
        row.pin(m.first, tags.begin(t), Provenance::Reference);
        for k in m.first + 1..=m.last {
            row.pin(k, tags.inside(t), Provenance::Reference);
        }
    }
    Ok(Dataset {
        tags: corpus.tags.clone(),
        kind: DatasetKind::Corpus,
        sentences: corpus.sentences.clone(),
        labels: labels.into_iter().map(Labeling::Soft).collect(),
    })
}

fn labeling_stats(relabeled: &Dataset) -> (usize, f64) {
    let (mut pinned, mut entropy, mut predicted) = (0usize, 0.0, 0usize);
    for l in &relabeled.labels {
        if let Labeling::Soft(s) = l {
            for (i, p) in s.provenance.iter().enumerate() {
                match p {
                    Provenance::Reference => pinned += 1,
                    Provenance::Predicted => {
                        entropy += s.entropy(i);
                        predicted += 1;
                    }
                    Provenance::Seed => {}
                }
            }
        }
    }
    (
        pinned,
        if predicted == 0 {
            0.0
        } else {
            entropy / predicted as f64
        },
    )
}

fn score(model: &TaggerModel, held_out: Option<&Dataset>) -> Result<Option<EvalReport>> {
    held_out
        .map(|h| evaluate(model, h, Decode::Marginal))
        .transpose()
}

/// Runs the bootstrap loop and returns `M_K` with a `K + 1` row trace.
pub fn iterative_train(
    seed: &Dataset,
    corpus: &Dataset,
    cfg: &BootstrapConfig,
) -> Result<(TaggerModel, IterationTrace)> {
    iterative_train_with(seed, corpus, cfg, |_, _, _| Ok(()))
}

/// Like [`iterative_train`], calling `on_checkpoint` with every model as it
/// is produced (iteration 0 first).
pub fn iterative_train_with<F>(
    seed: &Dataset,
    corpus: &Dataset,
    cfg: &BootstrapConfig,
    mut on_checkpoint: F,
) -> Result<(TaggerModel, IterationTrace)>
where
    F: FnMut(usize, &TaggerModel, &IterationRecord) -> Result<()>,
{
    let pins = cfg.pins(corpus);
    let mut model = train(seed, &cfg.train, None)?;
    let mut trace = IterationTrace::default();
    let record = IterationRecord {
        iteration: 0,
        checkpoint: checkpoint_name(0),
        pinned_tokens: 0,
        mean_entropy: 0.0,
        metrics: score(&model, cfg.held_out.as_ref())?,
    };
    on_checkpoint(0, &model, &record)?;
    trace.records.push(record);

    for i in 1..=cfg.iterations {
        let relabeled = relabel(corpus, &model, &pins)?;
        let (pinned_tokens, mean_entropy) = labeling_stats(&relabeled);
        let data = seed.concat(&relabeled)?;
        model = train(&data, &cfg.train, Some(&model))?;
        let record = IterationRecord {
            iteration: i,
            checkpoint: checkpoint_name(i),
            pinned_tokens,
            mean_entropy,
            metrics: score(&model, cfg.held_out.as_ref())?,
        };
        on_checkpoint(i, &model, &record)?;
        trace.records.push(record);
    }
    Ok((model, trace))
}

/// Hardens `model`'s relabeling of the corpus (with pins) and trains a fresh
/// sequence-level model on seed plus hardened corpus. Returns `model`
/// unchanged when `final_retrain` is off.
pub fn finalize(
    model: &TaggerModel,
    seed: &Dataset,
    corpus: &Dataset,
    cfg: &BootstrapConfig,
) -> Result<TaggerModel> {
    if !cfg.final_retrain {
        return Ok(model.clone());
    }
    let relabeled = relabel(corpus, model, &cfg.pins(corpus))?;
    let mut hardened = relabeled;
    for l in hardened.labels.iter_mut() {
        if let Labeling::Soft(s) = l {
            *l = Labeling::Hard(harden(s));
        }
    }
    let data = seed.concat(&hardened)?;
    let seq_cfg = TrainConfig {
        mode: ObjectiveMode::Sequence,
        ..cfg.train.clone()
    };
    train(&data, &seq_cfg, None)
}
