use std::collections::{HashMap, HashSet};

use crate::corpus::{Dataset, EntitySpan};
use crate::error::{Error, Result};
use crate::refset::{MatchPolicy, ReferenceSet};

/// A reference-set hit: an inclusive token range in one sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefMatch {
    pub sentence: usize,
    pub first: usize,
    pub last: usize,
    pub name: String,
    pub entity_type: String,
}

impl RefMatch {
    pub fn to_span(&self) -> EntitySpan {
        EntitySpan {
            sentence: self.sentence,
            first: self.first,
            last: self.last,
            entity_type: self.entity_type.clone(),
        }
    }
}

pub fn matches_to_spans(matches: &[RefMatch]) -> Vec<EntitySpan> {
    matches.iter().map(RefMatch::to_span).collect()
}

/// Prefer longer names, then the lexicographically smaller one.
fn better_name(candidate: &str, current: &str) -> bool {
    let (a, b) = (candidate.chars().count(), current.chars().count());
    a > b || (a == b && candidate < current)
}

struct NameIndex<'a> {
    by_key: HashMap<String, &'a str>,
    max_tokens: usize,
}

impl<'a> NameIndex<'a> {
    fn build(refset: &'a ReferenceSet, policy: &MatchPolicy) -> Self {
        let mut by_key: HashMap<String, &str> = HashMap::new();
        let mut max_tokens = 0;
        for name in refset.names() {
            max_tokens = max_tokens.max(name.split(' ').count());
            by_key
                .entry(policy.fold(name))
                .and_modify(|cur| {
                    if better_name(name, cur) {
                        *cur = name;
                    }
                })
                .or_insert(name);
        }
        Self { by_key, max_tokens }
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.by_key.get(key).copied()
    }
}

/// Finds non-overlapping reference-set mentions in every sentence.
///
/// Scanning left to right, the longest token window whose space-joined text
/// equals a name (under the policy's case rule) wins. With `allow_partial`,
/// a single token also matches when one of its `-`/`/` components equals a
/// name. Among candidates covering the same window the longer name wins.
pub fn find_matches(
    corpus: &Dataset,
    refset: &ReferenceSet,
    policy: &MatchPolicy,
) -> Vec<RefMatch> {
    if refset.is_empty() {
        return Vec::new();
    }
    let index = NameIndex::build(refset, policy);
    let mut out = Vec::new();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        let words: Vec<String> = sentence.words().map(|w| policy.fold(w)).collect();
        let n = words.len();
        let mut i = 0;
        while i < n {
            let mut hit: Option<(usize, &str)> = None;
            for k in (1..=index.max_tokens.min(n - i)).rev() {
                let key = words[i..i + k].join(" ");
                if let Some(name) = index.get(&key) {
                    hit = Some((k, name));
                    break;
                }
            }
            if hit.is_none() && policy.allow_partial {
                let mut best: Option<&str> = None;
                for part in words[i].split(['-', '/']).filter(|p| !p.is_empty()) {
                    if let Some(name) = index.get(part) {
                        if best.is_none_or(|b| better_name(name, b)) {
                            best = Some(name);
                        }
                    }
                }
                hit = best.map(|name| (1, name));
            }
            match hit {
                Some((k, name)) => {
                    out.push(RefMatch {
                        sentence: si,
                        first: i,
                        last: i + k - 1,
                        name: name.to_string(),
                        entity_type: refset.entity_type().to_string(),
                    });
                    i += k;
                }
                None => i += 1,
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AuditMode {
    /// Same sentence, same token range, same type.
    #[default]
    Exact,
    /// Same sentence and type with at least one shared token.
    Overlap,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatcherAudit {
    pub precision: f64,
    pub recall: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Mention-level precision and recall of matches against the gold spans of
/// a fully labeled dataset. Precision is 0 when there are no matches and
/// recall is 0 when there are no gold spans.
pub fn audit_matcher(
    matches: &[RefMatch],
    gold: &Dataset,
    mode: AuditMode,
) -> Result<MatcherAudit> {
    if let Some(i) = gold.labels.iter().position(|l| l.len().is_none()) {
        return Err(Error::UnlabeledSentence(i));
    }
    let gold_spans = gold.entity_spans();
    let predicted = matches_to_spans(matches);
    let (tp, found) = match mode {
        AuditMode::Exact => {
            let g: HashSet<&EntitySpan> = gold_spans.iter().collect();
            let tp = predicted.iter().filter(|p| g.contains(p)).count();
            let p: HashSet<&EntitySpan> = predicted.iter().collect();
            let found = gold_spans.iter().filter(|s| p.contains(s)).count();
            (tp, found)
        }
        AuditMode::Overlap => {
            let hits =
                |a: &EntitySpan, b: &EntitySpan| a.overlaps(b) && a.entity_type == b.entity_type;
            let tp = predicted
                .iter()
                .filter(|p| gold_spans.iter().any(|g| hits(p, g)))
                .count();
            let found = gold_spans
                .iter()
                .filter(|g| predicted.iter().any(|p| hits(p, g)))
                .count();
            (tp, found)
        }
    };
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(MatcherAudit {
        precision: ratio(tp, predicted.len()),
        recall: ratio(found, gold_spans.len()),
        true_positives: tp,
        false_positives: predicted.len() - tp,
        false_negatives: gold_spans.len() - found,
    })
}

/// `sentence<TAB>first<TAB>last<TAB>name`, one match per line.
pub fn render_matches_tsv(matches: &[RefMatch]) -> String {
    matches
        .iter()
        .map(|m| format!("{}\t{}\t{}\t{}\n", m.sentence, m.first, m.last, m.name))
        .collect()
}

pub fn parse_matches_tsv(text: &str, entity_type: &str) -> Result<Vec<RefMatch>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |column: usize| Error::MalformedLine {
            path: "matches".into(),
            line: i + 1,
            column,
            reason: "expected sentence, first, last, name".into(),
        };
        let cols: Vec<&str> = line.splitn(4, '\t').collect();
        if cols.len() != 4 {
            return Err(bad(cols.len()));
        }
        let num = |c: usize| cols[c].parse::<usize>().map_err(|_| bad(c + 1));
        out.push(RefMatch {
            sentence: num(0)?,
            first: num(1)?,
            last: num(2)?,
            name: cols[3].to_string(),
            entity_type: entity_type.to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DatasetKind, HardLabeling, Labeling, Sentence, TagSet};
    use crate::refset::Dictionary;

    fn corpus(sentences: &[&[&str]]) -> Dataset {
        let mut d = Dataset::new(TagSet::new(["PROT"]), DatasetKind::Corpus);
        for s in sentences {
            d.push(Sentence::from_tokens(s).unwrap(), Labeling::Unlabeled);
        }
        d
    }

    fn c2() -> MatchPolicy {
        MatchPolicy::relaxed(Dictionary::default())
    }

    #[test]
    fn exact_token_match() {
        let r = ReferenceSet::new(["TIGAR"], "PROT");
        let m = find_matches(&corpus(&[&["TIGAR", "binds"]]), &r, &MatchPolicy::exact());
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].first, m[0].last), (0, 0));
    }

    #[test]
    fn partial_compound_match() {
        let r = ReferenceSet::new(["TIGAR"], "PROT");
        let c = corpus(&[&["Flag-tagged-TIGAR", "was", "expressed"]]);
        assert!(find_matches(&c, &r, &MatchPolicy::exact()).is_empty());
        let m = find_matches(&c, &r, &c2());
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].first, m[0].last, m[0].name.as_str()), (0, 0, "TIGAR"));
    }

    #[test]
    fn case_rule() {
        let r = ReferenceSet::new(["TIGAR"], "PROT");
        let c = corpus(&[&["tigar"]]);
        assert!(find_matches(&c, &r, &MatchPolicy::exact()).is_empty());
        assert_eq!(find_matches(&c, &r, &c2()).len(), 1);
    }

    #[test]
    fn leftmost_longest_multi_token() {
        let r = ReferenceSet::new(
            [
                "tumor protein",
                "tumor protein p53",
                "p53",
                "protein p53 kinase",
            ],
            "PROT",
        );
        let c = corpus(&[&["the", "tumor", "protein", "p53", "kinase"]]);
        let m = find_matches(&c, &r, &MatchPolicy::exact());
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].first, m[0].last), (1, 3));
        assert_eq!(m[0].name, "tumor protein p53");
    }

    #[test]
    fn partial_prefers_longer_component_name() {
        let r = ReferenceSet::new(["TIGAR", "GFP"], "PROT");
        let m = find_matches(&corpus(&[&["GFP/TIGAR"]]), &r, &c2());
        assert_eq!(m[0].name, "TIGAR");
    }

    #[test]
    fn empty_refset_matches_nothing() {
        let r = ReferenceSet::new(Vec::<String>::new(), "PROT");
        assert!(find_matches(&corpus(&[&["a"]]), &r, &MatchPolicy::exact()).is_empty());
    }

    fn gold(tags: &[&[usize]]) -> Dataset {
        let mut d = Dataset::new(TagSet::new(["PROT"]), DatasetKind::Seed);
        for t in tags {
            let words: Vec<String> = (0..t.len()).map(|i| format!("w{i}")).collect();
            d.push(
                Sentence::from_tokens(&words).unwrap(),
                Labeling::Hard(HardLabeling::new(t.to_vec())),
            );
        }
        d
    }

    fn m(sentence: usize, first: usize, last: usize) -> RefMatch {
        RefMatch {
            sentence,
            first,
            last,
            name: "x".into(),
            entity_type: "PROT".into(),
        }
    }

    #[test]
    fn audit_perfect_and_partial() {
        let g = gold(&[&[1, 0, 1]]);
        let a = audit_matcher(&[m(0, 0, 0), m(0, 2, 2)], &g, AuditMode::Exact).unwrap();
        assert_eq!((a.precision, a.recall), (1.0, 1.0));
        let a = audit_matcher(&[m(0, 0, 0)], &g, AuditMode::Exact).unwrap();
        assert_eq!((a.precision, a.recall), (1.0, 0.5));
    }

    #[test]
    fn audit_overlap_mode() {
        let g = gold(&[&[1, 2, 0]]);
        let exact = audit_matcher(&[m(0, 1, 1)], &g, AuditMode::Exact).unwrap();
        assert_eq!((exact.precision, exact.recall), (0.0, 0.0));
        let overlap = audit_matcher(&[m(0, 1, 1)], &g, AuditMode::Overlap).unwrap();
        assert_eq!((overlap.precision, overlap.recall), (1.0, 1.0));
        let none = audit_matcher(&[], &g, AuditMode::Exact).unwrap();
        assert_eq!(none.precision, 0.0);
        assert_eq!(none.false_negatives, 1);
    }

    #[test]
    fn audit_requires_gold() {
        let c = corpus(&[&["a"]]);
        assert!(audit_matcher(&[], &c, AuditMode::Exact).is_err());
    }

    #[test]
    fn matches_tsv_round_trip() {
        let ms = vec![m(0, 1, 2), m(3, 0, 0)];
        let text = render_matches_tsv(&ms);
        assert_eq!(text, "0\t1\t2\tx\n3\t0\t0\tx\n");
        assert_eq!(parse_matches_tsv(&text, "PROT").unwrap(), ms);
        assert!(render_matches_tsv(&[]).is_empty());
    }
}
