//! Reference sets of entity names and the search policies used to find
//! their mentions in unlabeled text.

mod matcher;
mod policy;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, IoContext, Result};

pub use matcher::{
    audit_matcher, find_matches, matches_to_spans, parse_matches_tsv, render_matches_tsv,
    AuditMode, MatcherAudit, RefMatch,
};
pub use policy::{MatchPolicy, PolicyConfig};

/// Collapses internal whitespace runs to single spaces and trims the ends.
pub(crate) fn normalize_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn lines_of(text: &str) -> impl Iterator<Item = &str> {
    text.strip_prefix('\u{feff}')
        .unwrap_or(text)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
}

/// Gazetteer of surface forms for one entity type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceSet {
    names: BTreeSet<String>,
    entity_type: String,
}

impl ReferenceSet {
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>, entity_type: &str) -> Self {
        let names = names
            .into_iter()
            .map(|n| normalize_name(n.as_ref()))
            .filter(|n| !n.is_empty())
            .collect();
        Self {
            names,
            entity_type: entity_type.to_string(),
        }
    }

    /// One name per line; blank lines and a leading BOM are ignored and
    /// duplicates collapse.
    pub fn parse(text: &str, entity_type: &str) -> Result<Self> {
        let set = Self::new(lines_of(text), entity_type);
        if set.is_empty() {
            return Err(Error::EmptyReferenceSet);
        }
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>, entity_type: &str) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_path(path)?;
        Self::parse(&text, entity_type)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn entity_type(&self) -> &str {
        &self.entity_type
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Drops names found in the policy's dictionary (case-insensitively) and
    /// names shorter than `min_name_length` characters. `self` is untouched.
    pub fn filter(&self, policy: &MatchPolicy) -> ReferenceSet {
        let names = self
            .names
            .iter()
            .filter(|n| n.chars().count() >= policy.min_name_length)
            .filter(|n| policy.dictionary.as_ref().is_none_or(|d| !d.contains(n)))
            .cloned()
            .collect();
        ReferenceSet {
            names,
            entity_type: self.entity_type.clone(),
        }
    }
}

pub fn load_reference_set(path: impl AsRef<Path>, entity_type: &str) -> Result<ReferenceSet> {
    ReferenceSet::load(path, entity_type)
}

pub fn filter_names(refset: &ReferenceSet, policy: &MatchPolicy) -> ReferenceSet {
    refset.filter(policy)
}

/// Lowercased word list used to drop ambiguous names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    words: HashSet<String>,
}

impl Dictionary {
    pub fn new<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Self {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Self {
        Self::new(lines_of(text))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_path(path)?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in sorted order.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut w: Vec<&str> = self.words.iter().map(String::as_str).collect();
        w.sort_unstable();
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_dedups_and_skips_blanks() {
        let r = ReferenceSet::parse("TIGAR\np53\nTIGAR\n\n", "PROT").unwrap();
        assert_eq!(r.len(), 2);
        assert!(matches!(
            ReferenceSet::parse("", "PROT"),
            Err(Error::EmptyReferenceSet)
        ));
        assert!(matches!(
            ReferenceSet::parse("\n  \n", "PROT"),
            Err(Error::EmptyReferenceSet)
        ));
    }

    #[test]
    fn load_strips_bom() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.txt");
        let mut bytes = vec![0xEF, 0xBB, 0xBF];
        bytes.extend_from_slice(b"TIGAR\r\ntumor  protein p53\n");
        fs::write(&path, bytes).unwrap();
        let r = load_reference_set(&path, "PROT").unwrap();
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            ["TIGAR", "tumor protein p53"]
        );
        assert!(r.contains("TIGAR"));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_reference_set("/nonexistent/ref.txt", "PROT"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn dictionary_filter_removes_anova() {
        let r = ReferenceSet::new(["ANOVA", "TIGAR"], "PROT");
        let policy = MatchPolicy {
            dictionary: Some(Dictionary::parse("anova\nthe\n")),
            ..MatchPolicy::exact()
        };
        let f = filter_names(&r, &policy);
        assert_eq!(f.names().collect::<Vec<_>>(), ["TIGAR"]);
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn length_filter() {
        let r = ReferenceSet::new(["AB", "ABCD"], "PROT");
        let policy = MatchPolicy {
            min_name_length: 4,
            ..MatchPolicy::exact()
        };
        assert_eq!(r.filter(&policy).names().collect::<Vec<_>>(), ["ABCD"]);
        // counts scalar values, not bytes
        let r = ReferenceSet::new(["αβγ", "αβγδ"], "PROT");
        assert_eq!(r.filter(&policy).len(), 1);
    }

    #[test]
    fn identity_without_filters() {
        let r = ReferenceSet::new(["A", "BB", "anova"], "PROT");
        assert_eq!(r.filter(&MatchPolicy::exact()), r);
    }

    #[test]
    fn filter_is_idempotent() {
        let r = ReferenceSet::new(["A", "BBBB", "anova", "Kinase", "TIGAR"], "PROT");
        let p = MatchPolicy::relaxed(Dictionary::new(["kinase"]));
        let once = r.filter(&p);
        assert_eq!(once.filter(&p), once);
        assert_eq!(once.names().collect::<Vec<_>>(), ["BBBB", "TIGAR", "anova"]);
    }
}
