//! Invariants of labelings, scoring, relabeling and splitting.

use proptest::prelude::*;
use refboot::bootstrap::relabel;
use refboot::corpus::{
    bio_decode, bio_encode, harden, repair, soften, split_seed, tokenize, DatasetKind,
    HardLabeling, Labeling, Provenance, Sentence,
};
use refboot::eval::score_entities;
use refboot::tagger::train;
use refboot::{Dataset, EntitySpan, RefMatch, TagSet, Tagger, TaggerModel, TrainConfig};

fn tags2() -> TagSet {
    TagSet::new(["PROT", "CELL"])
}

fn labeling(max_len: usize) -> impl Strategy<Value = HardLabeling> {
    prop::collection::vec(0usize..5, 0..max_len).prop_map(HardLabeling::new)
}

fn span() -> impl Strategy<Value = EntitySpan> {
    (0usize..3, 0usize..5, 0usize..3, prop::bool::ANY).prop_map(|(sentence, first, len, cell)| {
        EntitySpan {
            sentence,
            first,
            last: first + len,
            entity_type: if cell { "CELL" } else { "PROT" }.into(),
        }
    })
}

fn dedup(mut v: Vec<EntitySpan>) -> Vec<EntitySpan> {
    v.sort();
    v.dedup();
    v
}

proptest! {
    #[test]
    fn repaired_labelings_survive_decode_encode(raw in labeling(15)) {
        let tags = tags2();
        let valid = repair(&raw, &tags);
        prop_assert_eq!(repair(&valid, &tags), valid.clone());
        let spans = bio_decode(&valid, &tags, 0);
        prop_assert_eq!(bio_encode(&spans, valid.len(), &tags).unwrap(), valid);
    }

    #[test]
    fn decoded_spans_are_disjoint_and_in_bounds(raw in labeling(15)) {
        let spans = bio_decode(&raw, &tags2(), 4);
        for w in spans.windows(2) {
            prop_assert!(w[0].last < w[1].first);
        }
        for s in &spans {
            prop_assert!(s.first <= s.last && s.last < raw.len() && s.sentence == 4);
        }
    }

    #[test]
    fn soften_then_harden_is_repair(raw in labeling(15)) {
        let tags = tags2();
        let soft = soften(&raw, &tags);
        prop_assert!(soft.rows_normalized(0.0));
        prop_assert_eq!(harden(&soft), repair(&raw, &tags));
    }

    #[test]
    fn scoring_matches_pairwise_count(pred in prop::collection::vec(span(), 0..10), gold in prop::collection::vec(span(), 0..10)) {
        let (p, g) = (dedup(pred.clone()), dedup(gold.clone()));
        let tp = p.iter().filter(|a| g.iter().any(|b| a == &b)).count();
        let r = score_entities(&pred, &gold);
        prop_assert_eq!(r.true_positives, tp);
        prop_assert_eq!(r.false_positives, p.len() - tp);
        prop_assert_eq!(r.false_negatives, g.len() - tp);
        let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (p.len() + g.len()) as f64 };
        prop_assert!((r.f1 - f1).abs() < 1e-12);
    }

    #[test]
    fn scoring_swaps_precision_and_recall(pred in prop::collection::vec(span(), 0..10), gold in prop::collection::vec(span(), 0..10)) {
        let a = score_entities(&pred, &gold);
        let b = score_entities(&gold, &pred);
        prop_assert_eq!(a.precision, b.recall);
        prop_assert_eq!(a.recall, b.precision);
        prop_assert_eq!(a.f1, b.f1);
    }

    #[test]
    fn tokenizer_offsets_point_into_source(text in "[A-Za-z0-9 ,.;()/-]{1,40}") {
        if let Ok(s) = tokenize(&text) {
            prop_assert!(s.offsets_consistent());
            prop_assert!(s.tokens.iter().all(|t| !t.text.trim().is_empty()));
        }
    }

    #[test]
    fn split_partitions_sentences(n in 1usize..60, frac in 0.01f64..0.99, seed in any::<u64>()) {
        let mut d = Dataset::new(TagSet::new(["PROT"]), DatasetKind::Seed);
        for i in 0..n {
            d.push(Sentence::from_tokens(&[format!("w{i}")]).unwrap(), Labeling::Hard(HardLabeling::outside(1)));
        }
        let s = split_seed(&d, frac, seed).unwrap();
        prop_assert_eq!(s.seed.len(), (frac * n as f64).round() as usize);
        let mut all: Vec<usize> = s.seed_indices.iter().chain(&s.corpus_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(s.corpus.labels.iter().all(|l| *l == Labeling::Unlabeled));
        prop_assert_eq!(&s.hidden_gold.sentences, &s.corpus.sentences);
    }
}

fn trained_model() -> TaggerModel {
    let tags = TagSet::new(["PROT"]);
    let mut seed = Dataset::new(tags, DatasetKind::Seed);
    for (words, labels) in [
        (vec!["TIGAR", "binds", "p53", "."], vec![1, 0, 1, 0]),
        (vec!["MDM2", "kinase", "was", "active"], vec![1, 2, 0, 0]),
    ] {
        seed.push(
            Sentence::from_tokens(&words).unwrap(),
            Labeling::Hard(HardLabeling::new(labels)),
        );
    }
    train(
        &seed,
        &TrainConfig {
            epochs: 3,
            ..Default::default()
        },
        None,
    )
    .unwrap()
}

const CORPUS_WORDS: &[&str] = &[
    "TIGAR", "binds", "p53", ".", "MDM2", "kinase", "cells", "of",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pins_override_and_the_rest_is_prediction(
        sents in prop::collection::vec(prop::collection::vec(prop::sample::select(CORPUS_WORDS), 1..7), 1..5),
        spans in prop::collection::vec((0usize..5, 0usize..7, 0usize..3), 0..6),
        noise in prop::collection::vec(-3.0f64..3.0, 64),
    ) {
        let mut model = trained_model();
        let mut p = model.parameters();
        for (k, x) in p.iter_mut().enumerate() {
            *x += noise[k % noise.len()];
        }
        model.set_parameters(&p);
        let mut corpus = Dataset::new(model.tags().clone(), DatasetKind::Corpus);
        for s in &sents {
            corpus.push(Sentence::from_tokens(s).unwrap(), Labeling::Unlabeled);
        }
        // keep only in-bounds, non-overlapping pins
        let mut taken = vec![vec![false; 7]; sents.len()];
        let mut matches = Vec::new();
        for (si, first, len) in spans {
            if si >= sents.len() || first + len >= sents[si].len() || taken[si][first..=first + len].iter().any(|&t| t) {
                continue;
            }
            taken[si][first..=first + len].iter_mut().for_each(|t| *t = true);
            matches.push(RefMatch { sentence: si, first, last: first + len, name: "x".into(), entity_type: "PROT".into() });
        }
        let out = relabel(&corpus, &model, &matches).unwrap();
        for (si, (s, l)) in corpus.sentences.iter().zip(&out.labels).enumerate() {
            let Labeling::Soft(soft) = l else { panic!("relabel produced a non-soft labeling") };
            prop_assert!(soft.rows_normalized(1e-12));
            let predicted = model.predict_soft(s);
            for t in 0..s.len() {
                let pin = matches.iter().find(|m| m.sentence == si && m.first <= t && t <= m.last);
                match pin {
                    Some(m) => {
                        let hot = if t == m.first { 1 } else { 2 };
                        let mut row = vec![0.0; 3];
                        row[hot] = 1.0;
                        prop_assert_eq!(&soft.dist[t], &row);
                        prop_assert_eq!(soft.provenance[t], Provenance::Reference);
                    }
                    None => {
                        prop_assert_eq!(&soft.dist[t], &predicted.dist[t]);
                        prop_assert_eq!(soft.provenance[t], Provenance::Predicted);
                    }
                }
            }
        }
    }
}
