//! Flat `key=value` run configuration shared by every subcommand. Flags
//! override file values; unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;

/// Marks an error as a usage problem (exit status 1).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PolicyName {
    C1,
    C2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DecodeName {
    Viterbi,
    Marginal,
}

macro_rules! run_config {
    ($($field:ident: $ty:ty),* $(,)?) => {
        #[derive(Clone, Debug, Default, PartialEq)]
        pub struct RunConfig {
            $(pub $field: Option<$ty>,)*
        }

        impl RunConfig {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $(stringify!($field) => self.$field = Some(parse_value(key, value)?),)*
                    other => {
                        return Err(usage(format!(
                            "unknown config key `{other}` (known: {})",
                            Self::KEYS.join(", ")
                        )))
                    }
                }
                Ok(())
            }

            /// Values from `over` win.
            pub fn overlay(self, over: RunConfig) -> RunConfig {
                RunConfig {
                    $($field: over.$field.or(self.$field),)*
                }
            }
        }
    };
}

run_config! {
    types: Types,
    entity_type: String,
    seed_frac: f64,
    test_fraction: f64,
    rng_seed: u64,
    iterations: usize,
    policy: PolicyName,
    min_name_length: usize,
    dictionary_path: PathBuf,
    allow_partial: bool,
    case_sensitive: bool,
    epochs: usize,
    learning_rate: f64,
    decay: f64,
    l2: f64,
    final_retrain: bool,
    decode: DecodeName,
    out_dir: PathBuf,
    n_sentences: usize,
    n_names: usize,
    n_context_words: usize,
    ambiguity_rate: f64,
    hyphenation_rate: f64,
    case_variation_rate: f64,
    short_name_rate: f64,
}

/// Comma-separated entity type list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Types(pub Vec<String>);

impl FromStr for Types {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let types: Vec<String> = s.split(',').map(|t| t.trim().to_string()).collect();
        if types
            .iter()
            .any(|t| t.is_empty() || t.contains(char::is_whitespace))
        {
            return Err(format!("bad entity type list `{s}`"));
        }
        Ok(Types(types))
    }
}

trait ConfigValue: Sized {
    fn parse_config(s: &str) -> std::result::Result<Self, String>;
}

macro_rules! from_str_value {
    ($($ty:ty),*) => {
        $(impl ConfigValue for $ty {
            fn parse_config(s: &str) -> std::result::Result<Self, String> {
                s.parse().map_err(|e| format!("{e}"))
            }
        })*
    };
}

from_str_value!(f64, u64, usize, String, PathBuf, Types);

impl ConfigValue for bool {
    fn parse_config(s: &str) -> std::result::Result<Self, String> {
        match s {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err("expected a boolean".into()),
        }
    }
}

impl ConfigValue for PolicyName {
    fn parse_config(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

impl ConfigValue for DecodeName {
    fn parse_config(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

fn parse_value<T: ConfigValue>(key: &str, value: &str) -> Result<T> {
    T::parse_config(value)
        .map_err(|e| usage(format!("config key `{key}`: bad value `{value}`: {e}")))
}

impl RunConfig {
    /// `#` starts a comment line; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn types(&self) -> Vec<String> {
        self.types
            .clone()
            .map_or_else(|| vec!["PROT".to_string()], |t| t.0)
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
