use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bootstrap::{finalize, iterative_train, BootstrapConfig, IterationTrace};
use crate::corpus::{bio_encode, split_seed, Dataset, DatasetKind, Labeling};
use crate::error::{Error, Result};
use crate::eval::metrics::{evaluate, Decode, EvalReport};
use crate::refset::{Dictionary, MatchPolicy, RefMatch, ReferenceSet};
use crate::tagger::{train, ObjectiveMode, TaggerModel, TrainConfig};

/// Where the non-seed training labels come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelSource {
    /// Every training sentence with its full gold labels.
    Full,
    /// Seed plus one random gold entity per corpus sentence, the rest O.
    OnePerSentence,
    /// Seed only; the corpus is labeled by the pipeline.
    Seed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyChoice {
    None,
    C1,
    C2,
}

impl PolicyChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyChoice::None => "-",
            PolicyChoice::C1 => "C1",
            PolicyChoice::C2 => "C2",
        }
    }
}

/// Output layer: marginal training and argmax decoding, or sequence
/// training and Viterbi decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputMode {
    Softmax,
    Crf,
}

impl OutputMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputMode::Softmax => "Softmax",
            OutputMode::Crf => "CRF",
        }
    }

    fn decode(self) -> Decode {
        match self {
            OutputMode::Softmax => Decode::Marginal,
            OutputMode::Crf => Decode::Viterbi,
        }
    }

    fn objective(self) -> ObjectiveMode {
        match self {
            OutputMode::Softmax => ObjectiveMode::Marginal,
            OutputMode::Crf => ObjectiveMode::Sequence,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub id: String,
    pub labels: LabelSource,
    pub policy: PolicyChoice,
    /// Model predictions fill the tokens that carry no label.
    pub predicted: bool,
    pub iterative: bool,
    pub output: OutputMode,
}

impl Condition {
    fn new(
        id: &str,
        labels: LabelSource,
        policy: PolicyChoice,
        predicted: bool,
        output: OutputMode,
    ) -> Self {
        Self {
            id: id.into(),
            labels,
            policy,
            predicted,
            iterative: predicted,
            output,
        }
    }

    fn training_data(&self) -> &'static str {
        match self.labels {
            LabelSource::Full => "100%",
            LabelSource::OnePerSentence => "seed + 1/sent",
            LabelSource::Seed => "seed",
        }
    }
}

/// The nine standard conditions E1 to E9.
pub fn standard_conditions() -> Vec<Condition> {
    use LabelSource::*;
    use OutputMode::*;
    use PolicyChoice as P;
    vec![
        Condition::new("E1", Full, P::None, false, Softmax),
        Condition::new("E2", Full, P::None, false, Crf),
        Condition::new("E3", OnePerSentence, P::None, false, Softmax),
        Condition::new("E4", OnePerSentence, P::None, false, Crf),
        Condition::new("E5", OnePerSentence, P::None, true, Softmax),
        Condition::new("E6", OnePerSentence, P::None, true, Crf),
        Condition::new("E7", Seed, P::C1, true, Softmax),
        Condition::new("E8", Seed, P::C2, true, Softmax),
        Condition::new("E9", Seed, P::C2, true, Crf),
    ]
}

#[derive(Clone, Debug)]
pub struct GridConfig {
    /// Held-out test fraction of the gold data.
    pub test_fraction: f64,
    /// Seed fraction of the remaining training data.
    pub seed_fraction: f64,
    pub rng_seed: u64,
    pub iterations: usize,
    pub train: TrainConfig,
    pub conditions: Vec<Condition>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed_fraction: 0.03,
            rng_seed: 0,
            iterations: 10,
            train: TrainConfig::default(),
            conditions: standard_conditions(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridRow {
    pub condition: Condition,
    /// Seed-only model with the same output mode, for pipeline conditions.
    pub seed_only: Option<EvalReport>,
    pub result: EvalReport,
    /// Per-iteration test scores of the bootstrap run, if any.
    pub trace: Option<IterationTrace>,
    pub model: TaggerModel,
}

#[derive(Clone, Debug)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub n_train: usize,
    pub n_seed: usize,
    pub n_test: usize,
}

fn pct(r: Option<&EvalReport>) -> [String; 3] {
    match r {
        Some(r) => [r.precision, r.recall, r.f1].map(|x| format!("{:.2}", 100.0 * x)),
        None => [String::new(), String::new(), String::new()],
    }
}

const HEADER: [&str; 12] = [
    "condition",
    "training",
    "policy",
    "predicted",
    "iterative",
    "output",
    "seed_P",
    "seed_R",
    "seed_F1",
    "P",
    "R",
    "F1",
];

impl GridReport {
    pub fn row(&self, id: &str) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.condition.id == id)
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let c = &r.condition;
                let yn = |b: bool| if b { "yes" } else { "no" }.to_string();
                let mut cells = vec![
                    c.id.clone(),
                    c.training_data().to_string(),
                    c.policy.as_str().to_string(),
                    yn(c.predicted),
                    yn(c.iterative),
                    c.output.as_str().to_string(),
                ];
                cells.extend(pct(r.seed_only.as_ref()));
                cells.extend(pct(Some(&r.result)));
                cells
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = HEADER.join("\t");
        out.push('\n');
        for row in self.cells() {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Fixed-width table with seed-only and augmented scores side by side.
    pub fn to_table(&self) -> String {
        let cells = self.cells();
        let widths: Vec<usize> = (0..HEADER.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([HEADER[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "train={} (seed={}) test={}",
            self.n_train, self.n_seed, self.n_test
        );
        let line = |row: &[&str]| {
            row.iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", line(&HEADER));
        for r in &cells {
            let refs: Vec<&str> = r.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}", line(&refs));
        }
        out
    }
}

/// Keeps one random gold entity per sentence; every other token becomes O.
pub fn keep_one_entity_per_sentence(
    gold: &Dataset,
    rng_seed: u64,
) -> Result<(Dataset, Vec<RefMatch>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let spans = gold.entity_spans();
    let mut out = Dataset::new(gold.tags.clone(), DatasetKind::Seed);
    let mut kept = Vec::new();
    let mut k = 0;
    for (i, s) in gold.sentences.iter().enumerate() {
        let start = k;
        while k < spans.len() && spans[k].sentence == i {
            k += 1;
        }
        let chosen: Vec<_> = spans[start..k]
            .choose(&mut rng)
            .cloned()
            .into_iter()
            .collect();
        kept.extend(chosen.iter().map(|sp| {
            RefMatch {
                sentence: i,
                first: sp.first,
                last: sp.last,
                name: s.tokens[sp.first..=sp.last]
                    .iter()
                    .map(|t| t.text.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
                entity_type: sp.entity_type.clone(),
            }
        }));
        out.push(
            s.clone(),
            Labeling::Hard(bio_encode(&chosen, s.len(), &gold.tags)?),
        );
    }
    Ok((out, kept))
}

/// Splits `gold` into train/test, carves a seed out of train, and runs every
/// condition, scoring on the test part.
pub fn run_experiment_grid(
    gold: &Dataset,
    reference: &ReferenceSet,
    dictionary: &Dictionary,
    cfg: &GridConfig,
) -> Result<GridReport> {
    if !gold.is_fully_labeled() {
        let i = gold
            .labels
            .iter()
            .position(|l| matches!(l, Labeling::Unlabeled))
            .unwrap_or(0);
        return Err(Error::UnlabeledSentence(i));
    }
    cfg.train.validate()?;
    let outer = split_seed(gold, cfg.test_fraction, cfg.rng_seed)?;
    let test = outer.seed;
    let pool = outer.hidden_gold;
    let inner = split_seed(&pool, cfg.seed_fraction, cfg.rng_seed.wrapping_add(1))?;
    let seed = inner.seed;
    let corpus = inner.corpus;
    let (one_per_sentence, one_pins) =
        keep_one_entity_per_sentence(&inner.hidden_gold, cfg.rng_seed.wrapping_add(2))?;

    let with_mode = |o: OutputMode| TrainConfig {
        mode: o.objective(),
        ..cfg.train.clone()
    };
    let seed_only: Vec<(OutputMode, EvalReport)> = [OutputMode::Softmax, OutputMode::Crf]
        .par_iter()
        .map(|&o| -> Result<_> {
            let m = train(&seed, &with_mode(o), None)?;
            Ok((o, evaluate(&m, &test, o.decode())?))
        })
        .collect::<Result<_>>()?;
    let seed_report = |o: OutputMode| seed_only.iter().find(|(m, _)| *m == o).map(|(_, r)| *r);

    let rows = cfg
        .conditions
        .par_iter()
        .map(|c| -> Result<GridRow> {
            let decode = c.output.decode();
            if !c.predicted {
                let data = match c.labels {
                    LabelSource::Full => pool.clone(),
                    LabelSource::OnePerSentence => seed.concat(&one_per_sentence)?,
                    LabelSource::Seed => seed.clone(),
                };
                let model = train(&data, &with_mode(c.output), None)?;
                return Ok(GridRow {
                    condition: c.clone(),
                    seed_only: None,
                    result: evaluate(&model, &test, decode)?,
                    trace: None,
                    model,
                });
            }
            let policy = match c.policy {
                PolicyChoice::C2 => MatchPolicy::relaxed(dictionary.clone()),
                _ => MatchPolicy::exact(),
            };
            let boot = BootstrapConfig {
                iterations: if c.iterative { cfg.iterations } else { 1 },
                train: TrainConfig {
                    mode: ObjectiveMode::Marginal,
                    ..cfg.train.clone()
                },
                final_retrain: c.output == OutputMode::Crf,
                reference: (c.policy != PolicyChoice::None).then(|| reference.clone()),
                policy,
                extra_pins: if c.labels == LabelSource::OnePerSentence {
                    one_pins.clone()
                } else {
                    Vec::new()
                },
                held_out: Some(test.clone()),
            };
            let (m_k, trace) = iterative_train(&seed, &corpus, &boot)?;
            let model = finalize(&m_k, &seed, &corpus, &boot)?;
            Ok(GridRow {
                condition: c.clone(),
                seed_only: seed_report(c.output),
                result: evaluate(&model, &test, decode)?,
                trace: Some(trace),
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridReport {
        rows,
        n_train: pool.len(),
        n_seed: seed.len(),
        n_test: test.len(),
    })
}
