use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, DatasetKind, HardLabeling, Labeling, Sentence, TagSet};
use crate::error::{Error, Result};
use crate::refset::{Dictionary, ReferenceSet};

/// Slot filled with an entity mention.
pub const ENTITY_SLOT: &str = "{E}";
/// Slot filled with a context word.
pub const WORD_SLOT: &str = "{W}";
/// Slot filled with an ambiguous name used as an ordinary word (tagged O).
pub const AMBIGUOUS_SLOT: &str = "{A}";

const DEFAULT_TEMPLATES: &[&str] = &[
    "{E} binds {E} in {W} cells .",
    "Expression of {E} was reduced in {W} tissue .",
    "We found that {E} interacts with {E} .",
    "The {W} pathway requires {E} and {W} {W} .",
    "{E} phosphorylates {E} at a {W} site .",
    "Loss of {E} increases {W} {W} in {W} mice .",
    "{E} and {E} form a {W} complex .",
    "Mutations in {E} cause {W} {W} .",
    "Knockdown of {E} blocked {W} signaling by {E} .",
    "Data were analysed by {A} after {W} treatment .",
    "{A} showed a {W} effect on {W} {W} .",
    "Samples were compared using {A} and {W} tests .",
    "The {W} {W} was measured in {W} samples .",
    "These results suggest that {W} {W} is {W} .",
    "Cells lacking {E} showed higher {A} scores .",
    "Levels of {W} {W} were normalized to {W} controls .",
    "Levels of {E} were normalized to {W} controls .",
    "Expression of {W} was reduced in {W} tissue .",
    "Cells lacking {W} showed higher {W} scores .",
    "We found that {W} interacts with {E} .",
    "Mutations in {W} {W} cause {W} {W} .",
    "{W} and {E} form a {W} complex .",
];

const FUNCTION_WORDS: &[&str] = &[
    "flag",
    "tagged",
    "gfp",
    "anti",
    "deficient",
    "his",
    "myc",
    "kinase",
    "receptor",
    "factor",
];

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "cl",
    "dr", "gr", "pl", "st", "tr",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ou"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "l", "m", "x", "t"];

/// Parameters of a generated gold corpus with a matching reference set.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_sentences: usize,
    pub n_names: usize,
    pub n_context_words: usize,
    /// Token templates over [`ENTITY_SLOT`], [`WORD_SLOT`] and [`AMBIGUOUS_SLOT`].
    pub templates: Vec<String>,
    /// Fraction of names that are also ordinary capitalized words (the
    /// ANOVA problem). These also appear in the dictionary.
    pub ambiguity_rate: f64,
    /// Fraction of single-token mentions embedded in a hyphenated compound
    /// such as `Flag-tagged-X`.
    pub hyphenation_rate: f64,
    /// Fraction of mentions written in a different letter case than the
    /// reference name.
    pub case_variation_rate: f64,
    /// Fraction of unambiguous names shorter than four characters.
    pub short_name_rate: f64,
    /// Exponent of the Zipf law over name and word frequencies.
    pub zipf_exponent: f64,
    pub entity_type: String,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_sentences: 2000,
            n_names: 300,
            n_context_words: 400,
            templates: DEFAULT_TEMPLATES.iter().map(|s| s.to_string()).collect(),
            ambiguity_rate: 0.3,
            hyphenation_rate: 0.2,
            case_variation_rate: 0.15,
            short_name_rate: 0.15,
            zipf_exponent: 0.8,
            entity_type: "PROT".into(),
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::SpecInvalid(m));
        for (name, r) in [
            ("ambiguity_rate", self.ambiguity_rate),
            ("hyphenation_rate", self.hyphenation_rate),
            ("case_variation_rate", self.case_variation_rate),
            ("short_name_rate", self.short_name_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return invalid(format!("{name} must be in [0, 1], got {r}"));
            }
        }
        if self.n_names == 0 || self.n_context_words == 0 {
            return invalid("n_names and n_context_words must be positive".into());
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return invalid(format!(
                "zipf_exponent must be finite and >= 0, got {}",
                self.zipf_exponent
            ));
        }
        if self.entity_type.trim().is_empty() || self.entity_type.contains(char::is_whitespace) {
            return invalid(format!("bad entity type `{}`", self.entity_type));
        }
        if self.templates.is_empty() {
            return invalid("no templates".into());
        }
        for t in &self.templates {
            if t.split_whitespace().next().is_none() {
                return invalid("empty template".into());
            }
            if let Some(bad) = t.split_whitespace().find(|w| {
                w.contains(['{', '}']) && ![ENTITY_SLOT, WORD_SLOT, AMBIGUOUS_SLOT].contains(w)
            }) {
                return invalid(format!("unknown slot `{bad}` in template `{t}`"));
            }
        }
        Ok(())
    }
}

/// Output of [`generate_synthetic`].
#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub gold: Dataset,
    /// Every generated entity name.
    pub reference: ReferenceSet,
    /// Lowercased ambiguous names plus the context vocabulary.
    pub dictionary: Dictionary,
    /// Names that double as ordinary words.
    pub ambiguous_names: Vec<String>,
}

#[derive(Clone, Debug)]
struct Name {
    tokens: Vec<String>,
}

struct Zipf {
    dist: WeightedIndex<f64>,
}

impl Zipf {
    fn new(n: usize, s: f64) -> Self {
        let w: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-s)).collect();
        Self {
            dist: WeightedIndex::new(w).expect("non-empty weights"),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        self.dist.sample(rng)
    }
}

fn pick<'a>(rng: &mut impl Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.gen_range(0..xs.len())]
}

fn pseudo_word(rng: &mut impl Rng, min_syl: usize, max_syl: usize) -> String {
    let syllables = rng.gen_range(min_syl..=max_syl);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(pick(rng, ONSETS));
        w.push_str(pick(rng, VOWELS));
    }
    w.push_str(pick(rng, CODAS));
    w
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f
            .to_uppercase()
            .chain(c.flat_map(char::to_lowercase))
            .collect(),
        None => String::new(),
    }
}

fn upper_letters(rng: &mut impl Rng, min: usize, max: usize) -> String {
    let len = rng.gen_range(min..=max);
    (0..len)
        .map(|_| rng.gen_range(b'A'..=b'Z') as char)
        .collect()
}

fn digits(rng: &mut impl Rng, min: usize, max: usize) -> String {
    let len = rng.gen_range(min..=max);
    let mut s = rng.gen_range(1..=9).to_string();
    for _ in 1..len {
        s.push(char::from(b'0' + rng.gen_range(0..10u8)));
    }
    s
}

fn unambiguous_name(rng: &mut impl Rng, short: bool) -> Vec<String> {
    if short {
        return vec![match rng.gen_range(0..3) {
            0 => upper_letters(rng, 2, 3),
            1 => format!(
                "{}{}",
                (rng.gen_range(b'a'..=b'z') as char),
                digits(rng, 2, 2)
            ),
            _ => format!("{}{}", upper_letters(rng, 2, 2), digits(rng, 1, 1)),
        }];
    }
    match rng.gen_range(0..14) {
        10..=11 => vec![format!(
            "{}{}",
            pseudo_word(rng, 1, 2),
            pick(rng, &["in", "ase", "ogen", "ulin"])
        )],
        12..=13 => vec![pseudo_word(rng, 2, 3)],
        0..=2 => vec![format!("{}{}", upper_letters(rng, 3, 4), digits(rng, 1, 2))],
        3..=4 => vec![format!(
            "{}{}",
            capitalize(&pseudo_word(rng, 1, 1)),
            digits(rng, 1, 2)
        )],
        5..=6 => vec![pseudo_word(rng, 2, 2).to_uppercase()],
        7 => vec![format!(
            "{}{}",
            rng.gen_range(b'a'..=b'z') as char,
            digits(rng, 3, 3)
        )],
        _ => vec![
            format!("{}{}", upper_letters(rng, 3, 3), digits(rng, 1, 1)),
            pick(rng, &["kinase", "receptor", "factor"]).to_string(),
        ],
    }
}

fn recase(rng: &mut impl Rng, w: &str) -> String {
    let lower = w.to_lowercase();
    let cap = capitalize(w);
    let upper = w.to_uppercase();
    let options: Vec<String> = [lower, cap, upper].into_iter().filter(|v| v != w).collect();
    if options.is_empty() {
        w.to_string()
    } else {
        options[rng.gen_range(0..options.len())].clone()
    }
}

fn hyphenate(rng: &mut impl Rng, w: &str) -> String {
    match rng.gen_range(0..4) {
        0 => format!("Flag-tagged-{w}"),
        1 => format!("GFP-{w}"),
        2 => format!("{w}-deficient"),
        _ => format!("anti-{w}"),
    }
}

/// Generates a fully labeled corpus from `spec`. Deterministic in `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut taken: HashSet<String> = FUNCTION_WORDS.iter().map(|w| w.to_string()).collect();
    for t in &spec.templates {
        taken.extend(t.split_whitespace().map(str::to_lowercase));
    }

    let mut fresh = |rng: &mut ChaCha8Rng, make: &mut dyn FnMut(&mut ChaCha8Rng) -> Vec<String>| loop {
        let tokens = make(rng);
        let keys: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        if keys.iter().all(|k| !taken.contains(k)) {
            taken.extend(keys);
            return tokens;
        }
    };

    let words: Vec<String> = (0..spec.n_context_words)
        .map(|_| fresh(&mut rng, &mut |r| vec![pseudo_word(r, 2, 3)]).remove(0))
        .collect();
    let n_amb = (spec.ambiguity_rate * spec.n_names as f64).round() as usize;
    let n_short = (spec.short_name_rate * (spec.n_names - n_amb) as f64).round() as usize;
    let mut names: Vec<Name> = Vec::with_capacity(spec.n_names);
    for i in 0..spec.n_names {
        let tokens = if i < n_amb {
            fresh(&mut rng, &mut |r| vec![pseudo_word(r, 2, 2).to_uppercase()])
        } else {
            let short = i < n_amb + n_short;
            fresh(&mut rng, &mut |r| unambiguous_name(r, short))
        };
        names.push(Name { tokens });
    }
    let ambiguous_names: Vec<String> = names[..n_amb].iter().map(|n| n.tokens[0].clone()).collect();
    // Frequency rank is independent of the name's kind.
    let mut rank: Vec<usize> = (0..names.len()).collect();
    rank.shuffle(&mut rng);
    let name_freq = Zipf::new(names.len(), spec.zipf_exponent);
    let word_freq = Zipf::new(words.len(), spec.zipf_exponent);
    let amb_freq = (n_amb > 0).then(|| Zipf::new(n_amb, spec.zipf_exponent));

    let tags = TagSet::new([spec.entity_type.as_str()]);
    let (b, i_tag) = (tags.begin(0), tags.inside(0));
    let mut gold = Dataset::new(tags, DatasetKind::Seed);
    let templates: Vec<Vec<&str>> = spec
        .templates
        .iter()
        .map(|t| t.split_whitespace().collect())
        .collect();
    for _ in 0..spec.n_sentences {
        let template = &templates[rng.gen_range(0..templates.len())];
        let mut tokens: Vec<String> = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        for &slot in template {
            match slot {
                ENTITY_SLOT => {
                    let name = &names[rank[name_freq.sample(&mut rng)]];
                    let mut surface = name.tokens.clone();
                    if rng.gen_bool(spec.case_variation_rate) {
                        surface[0] = recase(&mut rng, &surface[0]);
                    }
                    if surface.len() == 1 && rng.gen_bool(spec.hyphenation_rate) {
                        surface[0] = hyphenate(&mut rng, &surface[0]);
                    }
                    for (k, t) in surface.into_iter().enumerate() {
                        tokens.push(t);
                        labels.push(if k == 0 { b } else { i_tag });
                    }
                }
                AMBIGUOUS_SLOT => {
                    tokens.push(match &amb_freq {
                        Some(z) => ambiguous_names[z.sample(&mut rng)].clone(),
                        None => words[word_freq.sample(&mut rng)].to_uppercase(),
                    });
                    labels.push(0);
                }
                WORD_SLOT => {
                    tokens.push(words[word_freq.sample(&mut rng)].clone());
                    labels.push(0);
                }
                literal => {
                    tokens.push(literal.to_string());
                    labels.push(0);
                }
            }
        }
        gold.push(
            Sentence::from_tokens(&tokens)?,
            Labeling::Hard(HardLabeling::new(labels)),
        );
    }

    let reference = ReferenceSet::new(names.iter().map(|n| n.tokens.join(" ")), &spec.entity_type);
    let dictionary = Dictionary::new(
        ambiguous_names
            .iter()
            .map(|n| n.to_lowercase())
            .chain(words.iter().cloned()),
    );
    Ok(SyntheticCorpus {
        gold,
        reference,
        dictionary,
        ambiguous_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refset::{audit_matcher, find_matches, AuditMode, MatchPolicy};

    fn audit(spec: &SyntheticSpec, policy: &MatchPolicy) -> (f64, f64) {
        let s = generate_synthetic(spec).unwrap();
        let matches = find_matches(&s.gold.unlabeled(), &s.reference.filter(policy), policy);
        let a = audit_matcher(&matches, &s.gold, AuditMode::Exact).unwrap();
        (a.precision, a.recall)
    }

    fn c2(spec: &SyntheticSpec) -> MatchPolicy {
        MatchPolicy::relaxed(generate_synthetic(spec).unwrap().dictionary)
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let spec = SyntheticSpec {
            n_sentences: 200,
            ..Default::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.gold.sentences, b.gold.sentences);
        assert_eq!(a.gold.labels, b.gold.labels);
        assert_eq!(a.reference, b.reference);
        let c = generate_synthetic(&SyntheticSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(a.gold.sentences, c.gold.sentences);
    }

    #[test]
    fn shape_of_output() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(s.gold.len(), 2000);
        assert_eq!(s.reference.len(), 300);
        assert_eq!(s.ambiguous_names.len(), 90);
        s.gold.validate().unwrap();
        for a in &s.ambiguous_names {
            assert!(s.dictionary.contains(a));
            assert!(s.reference.contains(a));
        }
        for span in s.gold.entity_spans() {
            assert_eq!(span.entity_type, "PROT");
        }
    }

    #[test]
    fn no_ambiguity_means_exact_search_is_precise() {
        let spec = SyntheticSpec {
            ambiguity_rate: 0.0,
            hyphenation_rate: 0.0,
            ..Default::default()
        };
        let (p, r) = audit(&spec, &MatchPolicy::exact());
        assert_eq!(p, 1.0);
        assert!(r > 0.5);
    }

    #[test]
    fn ambiguity_hurts_exact_search_more_than_filtered_search() {
        let spec = SyntheticSpec::default();
        let (p1, _) = audit(&spec, &MatchPolicy::exact());
        let (p2, _) = audit(&spec, &c2(&spec));
        assert!(p1 < 1.0);
        assert!(p2 > p1, "C2 {p2} <= C1 {p1}");
    }

    #[test]
    fn partial_matching_recovers_compounds() {
        let spec = SyntheticSpec {
            ambiguity_rate: 0.0,
            hyphenation_rate: 0.2,
            ..Default::default()
        };
        let (_, r1) = audit(&spec, &MatchPolicy::exact());
        let (_, r2) = audit(&spec, &c2(&spec));
        assert!(r2 > r1, "C2 {r2} <= C1 {r1}");
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            SyntheticSpec {
                ambiguity_rate: 1.5,
                ..Default::default()
            },
            SyntheticSpec {
                hyphenation_rate: -0.1,
                ..Default::default()
            },
            SyntheticSpec {
                n_names: 0,
                ..Default::default()
            },
            SyntheticSpec {
                templates: vec!["{X} binds".into()],
                ..Default::default()
            },
            SyntheticSpec {
                templates: vec![],
                ..Default::default()
            },
        ] {
            assert!(matches!(
                generate_synthetic(&spec),
                Err(Error::SpecInvalid(_))
            ));
        }
    }
}
