use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::refset::Dictionary;

/// Filtering and matching configuration for a reference-set search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchPolicy {
    pub case_sensitive: bool,
    /// Minimum name length in Unicode scalar values.
    pub min_name_length: usize,
    pub dictionary: Option<Dictionary>,
    /// Also match a name against the hyphen/slash-delimited components of a
    /// single token.
    pub allow_partial: bool,
}

impl MatchPolicy {
    /// Case-sensitive exact search with no name filtering.
    pub fn exact() -> Self {
        Self {
            case_sensitive: true,
            min_name_length: 1,
            dictionary: None,
            allow_partial: false,
        }
    }

    /// Dictionary words and names under four characters removed;
    /// case-insensitive search that also accepts compound components.
    pub fn relaxed(dictionary: Dictionary) -> Self {
        Self {
            case_sensitive: false,
            min_name_length: 4,
            dictionary: Some(dictionary),
            allow_partial: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_name_length == 0 {
            return Err(Error::InvalidConfig("min_name_length must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn fold(&self, s: &str) -> String {
        if self.case_sensitive {
            s.to_string()
        } else {
            s.to_lowercase()
        }
    }
}

impl Default for MatchPolicy {
    fn default() -> Self {
        Self::exact()
    }
}

/// Flat `key=value` policy file. Recognized keys: `case_sensitive`,
/// `min_name_length`, `dictionary_path`, `allow_partial`. `#` starts a
/// comment line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyConfig {
    pub case_sensitive: bool,
    pub min_name_length: usize,
    pub dictionary_path: Option<PathBuf>,
    pub allow_partial: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            case_sensitive: true,
            min_name_length: 1,
            dictionary_path: None,
            allow_partial: false,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidConfig(format!(
            "{key}: expected a boolean, got `{v}`"
        ))),
    }
}

impl PolicyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "case_sensitive" => cfg.case_sensitive = parse_bool(key, value)?,
                "allow_partial" => cfg.allow_partial = parse_bool(key, value)?,
                "min_name_length" => {
                    cfg.min_name_length = value.parse().map_err(|_| {
                        Error::InvalidConfig(format!("min_name_length: bad integer `{value}`"))
                    })?
                }
                "dictionary_path" => {
                    cfg.dictionary_path = (!value.is_empty()).then(|| PathBuf::from(value))
                }
                other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
            }
        }
        if cfg.min_name_length == 0 {
            return Err(Error::InvalidConfig("min_name_length must be >= 1".into()));
        }
        Ok(cfg)
    }

    /// Loads the dictionary (relative paths resolve against `base_dir`).
    pub fn into_policy(self, base_dir: Option<&Path>) -> Result<MatchPolicy> {
        let dictionary = match self.dictionary_path {
            Some(p) => {
                let p = match base_dir {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                };
                Some(Dictionary::load(p)?)
            }
            None => None,
        };
        let policy = MatchPolicy {
            case_sensitive: self.case_sensitive,
            min_name_length: self.min_name_length,
            dictionary,
            allow_partial: self.allow_partial,
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config() {
        let cfg = PolicyConfig::parse(
            "# relaxed search\ncase_sensitive = false\nmin_name_length=4\nallow_partial=true\n",
        )
        .unwrap();
        assert!(!cfg.case_sensitive && cfg.allow_partial);
        assert_eq!(cfg.min_name_length, 4);
        assert_eq!(cfg.dictionary_path, None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(PolicyConfig::parse("fuzzy=true").is_err());
        assert!(PolicyConfig::parse("case_sensitive=maybe").is_err());
        assert!(PolicyConfig::parse("min_name_length=0").is_err());
        assert!(PolicyConfig::parse("min_name_length").is_err());
    }

    #[test]
    fn resolves_dictionary_relative_to_base() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("words.txt"), "anova\n").unwrap();
        let policy = PolicyConfig::parse("dictionary_path=words.txt")
            .unwrap()
            .into_policy(Some(dir.path()))
            .unwrap();
        assert!(policy.dictionary.unwrap().contains("ANOVA"));
    }
}
