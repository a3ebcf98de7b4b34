use crate::corpus::{EntitySpan, HardLabeling, TagKind, TagSet};
use crate::error::{Error, Result};

/// Rewrites every `I-t` that does not continue a `B-t`/`I-t` run into `B-t`.
pub fn repair(labels: &HardLabeling, tags: &TagSet) -> HardLabeling {
    let mut out = labels.tags.clone();
    let mut prev = TagKind::Outside;
    for tag in out.iter_mut() {
        let kind = tags.kind(*tag);
        if let TagKind::Inside(t) = kind {
            let continues = matches!(prev, TagKind::Begin(p) | TagKind::Inside(p) if p == t);
            if !continues {
                *tag = tags.begin(t);
            }
        }
        prev = tags.kind(*tag);
    }
    HardLabeling::new(out)
}

/// Decodes maximal entity spans from a labeling, repairing invalid `I-t`
/// starts first. `sentence` is stamped onto every span.
pub fn bio_decode(labels: &HardLabeling, tags: &TagSet, sentence: usize) -> Vec<EntitySpan> {
    let repaired = repair(labels, tags);
    let mut spans = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    let close = |open: &mut Option<(usize, usize)>, end: usize, spans: &mut Vec<EntitySpan>| {
        if let Some((first, t)) = open.take() {
            spans.push(EntitySpan {
                sentence,
                first,
                last: end,
                entity_type: tags.entity_types()[t].clone(),
            });
        }
    };
    for (i, &tag) in repaired.tags.iter().enumerate() {
        match tags.kind(tag) {
            TagKind::Outside => close(&mut open, i.wrapping_sub(1), &mut spans),
            TagKind::Begin(t) => {
                close(&mut open, i.wrapping_sub(1), &mut spans);
                open = Some((i, t));
            }
            TagKind::Inside(_) => {}
        }
    }
    close(&mut open, repaired.len().wrapping_sub(1), &mut spans);
    spans
}

/// Encodes spans back into BIO tags over `n_tokens` tokens.
pub fn bio_encode(spans: &[EntitySpan], n_tokens: usize, tags: &TagSet) -> Result<HardLabeling> {
    let mut out = vec![0usize; n_tokens];
    let mut taken = vec![false; n_tokens];
    for span in spans {
        if span.first > span.last || span.last >= n_tokens {
            return Err(Error::SpanOutOfBounds {
                first: span.first,
                last: span.last,
                n_tokens,
            });
        }
        let t = tags
            .type_index(&span.entity_type)
            .ok_or_else(|| Error::UnknownTagName(span.entity_type.clone()))?;
        for i in span.first..=span.last {
            if taken[i] {
                return Err(Error::OverlappingSpans(i));
            }
            taken[i] = true;
            out[i] = if i == span.first {
                tags.begin(t)
            } else {
                tags.inside(t)
            };
        }
    }
    Ok(HardLabeling::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prot() -> TagSet {
        TagSet::new(["PROT"])
    }

    fn span(first: usize, last: usize) -> EntitySpan {
        EntitySpan {
            sentence: 0,
            first,
            last,
            entity_type: "PROT".into(),
        }
    }

    /// Reference decoder: enumerates every token range and keeps those that
    /// form a maximal run after the leading-I repair rule.
    fn brute_force_decode(labels: &[usize], tags: &TagSet) -> Vec<EntitySpan> {
        let n = labels.len();
        let ty_of = |tag: usize| match tags.kind(tag) {
            TagKind::Outside => None,
            TagKind::Begin(t) | TagKind::Inside(t) => Some(t),
        };
        let is_inside = |tag: usize| matches!(tags.kind(tag), TagKind::Inside(_));
        let mut out = Vec::new();
        for first in 0..n {
            for last in first..n {
                let Some(t) = ty_of(labels[first]) else {
                    continue;
                };
                // a run starts at `first` if it is B, or an I that does not
                // continue a same-type token to its left
                let starts =
                    !is_inside(labels[first]) || first == 0 || ty_of(labels[first - 1]) != Some(t);
                let body = (first + 1..=last).all(|k| labels[k] == tags.inside(t));
                let maximal = last + 1 == n || labels[last + 1] != tags.inside(t);
                if starts && body && maximal {
                    out.push(EntitySpan {
                        sentence: 0,
                        first,
                        last,
                        entity_type: tags.entity_types()[t].clone(),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn decodes_simple_span() {
        let spans = bio_decode(&HardLabeling::new(vec![1, 2, 0]), &prot(), 0);
        assert_eq!(spans, vec![span(0, 1)]);
        assert!(bio_decode(&HardLabeling::new(vec![0, 0, 0]), &prot(), 0).is_empty());
    }

    #[test]
    fn repairs_leading_inside() {
        let labels = HardLabeling::new(vec![2, 0, 1]);
        let spans = bio_decode(&labels, &prot(), 0);
        assert_eq!(spans, vec![span(0, 0), span(2, 2)]);
        assert_eq!(spans, brute_force_decode(&labels.tags, &prot()));
        assert_eq!(repair(&labels, &prot()).tags, vec![1, 0, 1]);
    }

    #[test]
    fn repairs_type_switch() {
        let tags = TagSet::new(["PROT", "CELL"]);
        // B-PROT I-CELL -> B-PROT B-CELL
        let labels = HardLabeling::new(vec![1, 4]);
        assert_eq!(repair(&labels, &tags).tags, vec![1, 3]);
        assert_eq!(bio_decode(&labels, &tags, 7).len(), 2);
        assert_eq!(bio_decode(&labels, &tags, 7)[0].sentence, 7);
    }

    #[test]
    fn encodes_spans() {
        let tags = prot();
        assert_eq!(
            bio_encode(&[span(0, 1)], 3, &tags).unwrap().tags,
            vec![1, 2, 0]
        );
        assert_eq!(bio_encode(&[], 2, &tags).unwrap().tags, vec![0, 0]);
        let adjacent = [span(0, 0), span(1, 1)];
        let enc = bio_encode(&adjacent, 2, &tags).unwrap();
        assert_eq!(enc.tags, vec![1, 1]);
        assert_eq!(bio_decode(&enc, &tags, 0), adjacent.to_vec());
    }

    #[test]
    fn encode_rejects_overlap_and_out_of_bounds() {
        let tags = prot();
        assert!(matches!(
            bio_encode(&[span(0, 1), span(1, 2)], 3, &tags),
            Err(Error::OverlappingSpans(1))
        ));
        assert!(matches!(
            bio_encode(&[span(2, 3)], 3, &tags),
            Err(Error::SpanOutOfBounds { .. })
        ));
    }

    proptest! {
        #[test]
        fn decode_matches_brute_force(labels in prop::collection::vec(0usize..5, 0..12)) {
            let tags = TagSet::new(["PROT", "CELL"]);
            let h = HardLabeling::new(labels.clone());
            prop_assert_eq!(bio_decode(&h, &tags, 0), brute_force_decode(&labels, &tags));
        }

        #[test]
        fn encode_decode_is_repair(labels in prop::collection::vec(0usize..5, 0..12)) {
            let tags = TagSet::new(["PROT", "CELL"]);
            let h = HardLabeling::new(labels);
            let spans = bio_decode(&h, &tags, 0);
            prop_assert_eq!(bio_encode(&spans, h.len(), &tags).unwrap(), repair(&h, &tags));
        }
    }
}
