use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

use crate::corpus::{harden, Dataset, EntitySpan, HardLabeling};
use crate::error::{Error, Result};
use crate::tagger::Tagger;

/// Entity-level precision/recall/F1 with the underlying counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Fraction of tokens whose predicted tag equals the gold tag, when
    /// token-level labels were available.
    pub token_accuracy: Option<f64>,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            token_accuracy: None,
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P={:.2} R={:.2} F1={:.2}",
            100.0 * self.precision,
            100.0 * self.recall,
            100.0 * self.f1
        )
    }
}

/// Exact (sentence, range, type) matching between predicted and gold spans.
pub fn score_entities(pred: &[EntitySpan], gold: &[EntitySpan]) -> EvalReport {
    let gold_set: HashSet<&EntitySpan> = gold.iter().collect();
    let pred_set: HashSet<&EntitySpan> = pred.iter().collect();
    let tp = pred_set.intersection(&gold_set).count();
    EvalReport::from_counts(tp, pred_set.len() - tp, gold_set.len() - tp)
}

/// How a tagger's output is turned into hard labels for scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decode {
    /// Per-token argmax of the posterior marginals.
    Marginal,
    /// Viterbi path.
    Viterbi,
}

pub fn predict_all<T: Tagger + ?Sized>(
    tagger: &T,
    data: &Dataset,
    decode: Decode,
) -> Vec<HardLabeling> {
    data.sentences
        .par_iter()
        .map(|s| match decode {
            Decode::Marginal => harden(&tagger.predict_soft(s)),
            Decode::Viterbi => tagger.predict_hard(s),
        })
        .collect()
}

/// Scores hard predictions against a fully labeled gold dataset.
pub fn score_labelings(predictions: &[HardLabeling], gold: &Dataset) -> Result<EvalReport> {
    let mut pred_spans = Vec::new();
    let (mut correct, mut total) = (0usize, 0usize);
    for (i, (p, g)) in predictions.iter().zip(&gold.labels).enumerate() {
        let g = g.to_hard().ok_or(Error::UnlabeledSentence(i))?;
        if g.len() != p.len() {
            return Err(Error::LabelLengthMismatch {
                sentence: i,
                tokens: g.len(),
                labels: p.len(),
            });
        }
        correct += p.tags.iter().zip(&g.tags).filter(|(a, b)| a == b).count();
        total += g.len();
        pred_spans.extend(crate::corpus::bio_decode(p, &gold.tags, i));
    }
    let mut report = score_entities(&pred_spans, &gold.entity_spans());
    report.token_accuracy = Some(if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    });
    Ok(report)
}

/// Predicts every sentence of `gold` and scores the result.
pub fn evaluate<T: Tagger + ?Sized>(
    tagger: &T,
    gold: &Dataset,
    decode: Decode,
) -> Result<EvalReport> {
    if tagger.tag_set() != &gold.tags {
        return Err(Error::ModelTagSetMismatch {
            expected: tagger.tag_set().to_string(),
            found: gold.tags.to_string(),
        });
    }
    score_labelings(&predict_all(tagger, gold, decode), gold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(sentence: usize, first: usize, last: usize) -> EntitySpan {
        EntitySpan {
            sentence,
            first,
            last,
            entity_type: "PROT".into(),
        }
    }

    #[test]
    fn perfect_prediction() {
        let gold: Vec<EntitySpan> = (0..5).map(|i| span(i, 0, 1)).collect();
        let r = score_entities(&gold, &gold);
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn half_recall() {
        let r = score_entities(&[span(0, 0, 0)], &[span(0, 0, 0), span(0, 2, 2)]);
        assert_eq!((r.precision, r.recall), (1.0, 0.5));
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(
            (r.true_positives, r.false_positives, r.false_negatives),
            (1, 0, 1)
        );
    }

    #[test]
    fn empty_sets_score_zero() {
        let r = score_entities(&[], &[]);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn type_must_match() {
        let mut other = span(0, 0, 0);
        other.entity_type = "CELL".into();
        assert_eq!(score_entities(&[other], &[span(0, 0, 0)]).true_positives, 0);
    }

    #[test]
    fn display_is_percentages() {
        let r = EvalReport::from_counts(1, 1, 3);
        assert_eq!(r.to_string(), "P=50.00 R=25.00 F1=33.33");
    }
}
