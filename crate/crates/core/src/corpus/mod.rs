//! Corpus data model: tokens, sentences, BIO tag sets, hard and soft
//! labelings, and the file formats that carry them.

mod bio;
mod conll;
mod soft;
mod split;
mod tokenize;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bio::{bio_decode, bio_encode, repair};
pub use conll::{parse_conll, read_conll, render_conll, write_conll};
pub use soft::{harden, parse_soft_tsv, read_soft_tsv, render_soft_tsv, soften, write_soft_tsv};
pub use split::{split_seed, SeedSplit};
pub use tokenize::tokenize;

/// A token with its character offsets into the source sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Offset of the first character, counted in Unicode scalar values.
    pub start: usize,
    /// One past the last character.
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub source: String,
}

impl Sentence {
    /// Builds a sentence from pre-tokenized text, joining tokens with single
    /// spaces to form the source.
    pub fn from_tokens<S: AsRef<str>>(words: &[S]) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::EmptySentence);
        }
        let mut source = String::new();
        let mut tokens = Vec::with_capacity(words.len());
        let mut offset = 0;
        for (i, w) in words.iter().enumerate() {
            let w = w.as_ref();
            if w.is_empty() {
                return Err(Error::EmptySentence);
            }
            if i > 0 {
                source.push(' ');
                offset += 1;
            }
            let len = w.chars().count();
            source.push_str(w);
            tokens.push(Token {
                text: w.to_string(),
                start: offset,
                end: offset + len,
            });
            offset += len;
        }
        Ok(Self { tokens, source })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    /// Checks that every token is the source substring at its offsets and
    /// that tokens are sorted and non-overlapping.
    pub fn offsets_consistent(&self) -> bool {
        let chars: Vec<char> = self.source.chars().collect();
        let mut prev_end = 0;
        for t in &self.tokens {
            if t.start < prev_end || t.end <= t.start || t.end > chars.len() {
                return false;
            }
            if chars[t.start..t.end].iter().collect::<String>() != t.text {
                return false;
            }
            prev_end = t.end;
        }
        true
    }
}

/// Position of a tag in the BIO scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TagKind {
    Outside,
    Begin(usize),
    Inside(usize),
}

/// BIO tag inventory. Index 0 is `O`; entity type `t` owns `B-t` at
/// `1 + 2t` and `I-t` at `2 + 2t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    entity_types: Vec<String>,
}

impl TagSet {
    pub fn new<S: Into<String>>(entity_types: impl IntoIterator<Item = S>) -> Self {
        Self {
            entity_types: entity_types.into_iter().map(Into::into).collect(),
        }
    }

    pub fn entity_types(&self) -> &[String] {
        &self.entity_types
    }

    pub fn len(&self) -> usize {
        1 + 2 * self.entity_types.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.entity_types.iter().position(|t| t == name)
    }

    pub fn begin(&self, type_idx: usize) -> usize {
        1 + 2 * type_idx
    }

    pub fn inside(&self, type_idx: usize) -> usize {
        2 + 2 * type_idx
    }

    pub fn kind(&self, tag: usize) -> TagKind {
        match tag {
            0 => TagKind::Outside,
            t if t % 2 == 1 => TagKind::Begin((t - 1) / 2),
            t => TagKind::Inside((t - 2) / 2),
        }
    }

    pub fn name(&self, tag: usize) -> String {
        match self.kind(tag) {
            TagKind::Outside => "O".to_string(),
            TagKind::Begin(t) => format!("B-{}", self.entity_types[t]),
            TagKind::Inside(t) => format!("I-{}", self.entity_types[t]),
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        if name == "O" {
            return Some(0);
        }
        let (prefix, ty) = name.split_once('-')?;
        let t = self.type_index(ty)?;
        match prefix {
            "B" => Some(self.begin(t)),
            "I" => Some(self.inside(t)),
            _ => None,
        }
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.entity_types.join(","))
    }
}

/// One tag index per token.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardLabeling {
    pub tags: Vec<usize>,
}

impl HardLabeling {
    pub fn new(tags: Vec<usize>) -> Self {
        Self { tags }
    }

    pub fn outside(n: usize) -> Self {
        Self { tags: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// Where a soft label row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Seed,
    Reference,
    Predicted,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Seed => "SEED",
            Provenance::Reference => "REFERENCE",
            Provenance::Predicted => "PREDICTED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "SEED" => Some(Provenance::Seed),
            "REFERENCE" => Some(Provenance::Reference),
            "PREDICTED" => Some(Provenance::Predicted),
            _ => None,
        }
    }
}

/// Per-token probability distributions over a tag set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SoftLabeling {
    pub dist: Vec<Vec<f64>>,
    pub provenance: Vec<Provenance>,
}

impl SoftLabeling {
    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Replaces row `i` with a one-hot vector on `tag`.
    pub fn pin(&mut self, i: usize, tag: usize, provenance: Provenance) {
        let row = &mut self.dist[i];
        row.iter_mut().for_each(|p| *p = 0.0);
        row[tag] = 1.0;
        self.provenance[i] = provenance;
    }

    pub fn rows_normalized(&self, tol: f64) -> bool {
        self.dist.iter().all(|row| {
            row.iter().all(|&p| (0.0..=1.0).contains(&p))
                && (row.iter().sum::<f64>() - 1.0).abs() <= tol
        })
    }

    /// Shannon entropy (nats) of row `i`.
    pub fn entropy(&self, i: usize) -> f64 {
        self.dist[i]
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum Labeling {
    #[default]
    Unlabeled,
    Hard(HardLabeling),
    Soft(SoftLabeling),
}

impl Labeling {
    /// Token count, or `None` for an unlabeled sentence.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self {
            Labeling::Unlabeled => None,
            Labeling::Hard(h) => Some(h.len()),
            Labeling::Soft(s) => Some(s.len()),
        }
    }

    /// Hard view of the labeling: hard labels as-is, soft labels hardened.
    pub fn to_hard(&self) -> Option<HardLabeling> {
        match self {
            Labeling::Unlabeled => None,
            Labeling::Hard(h) => Some(h.clone()),
            Labeling::Soft(s) => Some(harden(s)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetKind {
    Seed,
    Corpus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub tags: TagSet,
    pub kind: DatasetKind,
    pub sentences: Vec<Sentence>,
    pub labels: Vec<Labeling>,
}

impl Dataset {
    pub fn new(tags: TagSet, kind: DatasetKind) -> Self {
        Self {
            tags,
            kind,
            sentences: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, sentence: Sentence, labels: Labeling) {
        self.sentences.push(sentence);
        self.labels.push(labels);
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Fails with `LabelLengthMismatch` if any labeled sentence's label
    /// count differs from its token count.
    pub fn validate(&self) -> Result<()> {
        for (i, (s, l)) in self.sentences.iter().zip(&self.labels).enumerate() {
            if let Some(n) = l.len() {
                if n != s.len() {
                    return Err(Error::LabelLengthMismatch {
                        sentence: i,
                        tokens: s.len(),
                        labels: n,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.labels
            .iter()
            .all(|l| !matches!(l, Labeling::Unlabeled))
    }

    /// Same sentences with every label removed.
    pub fn unlabeled(&self) -> Dataset {
        Dataset {
            tags: self.tags.clone(),
            kind: DatasetKind::Corpus,
            sentences: self.sentences.clone(),
            labels: vec![Labeling::Unlabeled; self.len()],
        }
    }

    /// Gold entity spans of every sentence (hard view; unlabeled sentences
    /// contribute nothing).
    pub fn entity_spans(&self) -> Vec<EntitySpan> {
        let mut out = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(h) = l.to_hard() {
                out.extend(bio_decode(&h, &self.tags, i));
            }
        }
        out
    }

    /// Concatenation of `self` and `other`, which must share a tag set.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.tags != other.tags {
            return Err(Error::ModelTagSetMismatch {
                expected: self.tags.to_string(),
                found: other.tags.to_string(),
            });
        }
        let mut out = self.clone();
        out.sentences.extend(other.sentences.iter().cloned());
        out.labels.extend(other.labels.iter().cloned());
        Ok(out)
    }
}

/// An entity mention as an inclusive token range within one sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    pub sentence: usize,
    pub first: usize,
    pub last: usize,
    pub entity_type: String,
}

impl EntitySpan {
    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.sentence == other.sentence && self.first <= other.last && other.first <= self.last
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_set_layout() {
        let tags = TagSet::new(["PROT", "CELL"]);
        assert_eq!(tags.len(), 5);
        assert_eq!(tags.name(0), "O");
        assert_eq!(tags.name(1), "B-PROT");
        assert_eq!(tags.name(2), "I-PROT");
        assert_eq!(tags.name(3), "B-CELL");
        assert_eq!(tags.index_of("I-CELL"), Some(4));
        assert_eq!(tags.index_of("B-XYZ"), None);
        assert_eq!(tags.index_of("E-PROT"), None);
        for t in 0..tags.len() {
            assert_eq!(tags.index_of(&tags.name(t)), Some(t));
        }
    }

    #[test]
    fn sentence_from_tokens_reconstructs_source() {
        let s = Sentence::from_tokens(&["p53", "binds", "MDM2", "."]).unwrap();
        assert_eq!(s.source, "p53 binds MDM2 .");
        assert!(s.offsets_consistent());
        assert!(Sentence::from_tokens::<&str>(&[]).is_err());
    }

    #[test]
    fn validate_reports_mismatch() {
        let tags = TagSet::new(["PROT"]);
        let mut d = Dataset::new(tags, DatasetKind::Seed);
        d.push(
            Sentence::from_tokens(&["a", "b"]).unwrap(),
            Labeling::Hard(HardLabeling::new(vec![0])),
        );
        assert!(matches!(
            d.validate(),
            Err(Error::LabelLengthMismatch {
                sentence: 0,
                tokens: 2,
                labels: 1
            })
        ));
    }
}
