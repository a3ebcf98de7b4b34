use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;

/// Feature templates applied at every token position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Neighbor tokens within this distance contribute lowercased identity
    /// features.
    pub window: usize,
    /// Longest prefix/suffix template.
    pub affix_len: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            window: 2,
            affix_len: 3,
        }
    }
}

/// Compressed case/digit pattern: `MDM2` -> `Xd`, `Flag-tagged` -> `Xx-x`.
pub fn word_shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in word.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if last != Some(s) {
            out.push(s);
            last = Some(s);
        }
    }
    out
}

impl FeatureConfig {
    /// Feature strings for every token of `sentence`.
    pub fn extract(&self, sentence: &Sentence) -> Vec<Vec<String>> {
        let words: Vec<&str> = sentence.words().collect();
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let n = words.len();
        (0..n)
            .map(|i| {
                let w = words[i];
                let chars: Vec<char> = w.chars().collect();
                let mut f = vec![
                    "bias".to_string(),
                    format!("w={w}"),
                    format!("lw={}", lower[i]),
                    format!("sh={}", word_shape(w)),
                ];
                for k in 1..=self.affix_len.min(chars.len()) {
                    f.push(format!("p{k}={}", chars[..k].iter().collect::<String>()));
                    f.push(format!(
                        "s{k}={}",
                        chars[chars.len() - k..].iter().collect::<String>()
                    ));
                }
                if chars.iter().any(|c| c.is_numeric()) {
                    f.push("has_digit".into());
                }
                if w.contains(['-', '/']) {
                    f.push("compound".into());
                }
                if i == 0 {
                    f.push("first".into());
                }
                for d in 1..=self.window {
                    let left = if i >= d { lower[i - d].as_str() } else { "<s>" };
                    let right = if i + d < n {
                        lower[i + d].as_str()
                    } else {
                        "</s>"
                    };
                    f.push(format!("w[-{d}]={left}"));
                    f.push(format!("w[+{d}]={right}"));
                }
                f
            })
            .collect()
    }
}

/// Feature string to dense id. Grows during training, frozen otherwise.
#[derive(Clone, Debug, Default)]
pub struct FeatureDict {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl FeatureDict {
    pub fn from_names(names: Vec<String>) -> Self {
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Self { names, ids }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn get_or_insert(&mut self, name: String) -> u32 {
        if let Some(&id) = self.ids.get(&name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(name.clone(), id);
        self.names.push(name);
        id
    }
}
