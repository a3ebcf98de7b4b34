//! `refboot`: seed splitting, reference-set matching, bootstrapped training,
//! evaluation, prediction and the synthetic experiment grid.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{usage, DecodeName, PolicyName, RunConfig, Types, Usage};

#[derive(Parser, Debug)]
#[command(
    name = "refboot",
    version,
    about = "Reference-set augmented bootstrapping for NER"
)]
struct Cli {
    /// key=value run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Carve a random labeled seed out of a labeled CoNLL file.
    Split(SplitArgs),
    /// Find reference-set mentions in a corpus.
    Match(MatchArgs),
    /// Train a seed model and refine it on a corpus with reference pins.
    Bootstrap(BootstrapArgs),
    /// Score a model on labeled data.
    Eval(EvalArgs),
    /// Tag sentences with a model.
    Predict(PredictArgs),
    /// Generate a synthetic corpus and optionally run the experiment grid.
    Synthetic(SyntheticArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Comma-separated entity types.
    #[arg(long)]
    types: Option<Types>,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct PolicyArgs {
    #[arg(long, value_enum)]
    policy: Option<PolicyName>,
    /// Drop names shorter than this many characters.
    #[arg(long)]
    min_name_len: Option<usize>,
    /// Lowercase word list; names found in it are dropped.
    #[arg(long, value_name = "FILE")]
    dictionary: Option<PathBuf>,
    /// Match names against hyphen/slash components of a token.
    #[arg(long)]
    partial: bool,
    #[arg(long)]
    case_insensitive: bool,
}

#[derive(Args, Debug, Default)]
struct TrainArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    /// Fully labeled CoNLL file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    seed_frac: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MatchArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// One name per line.
    #[arg(long)]
    refset: PathBuf,
    /// Labeled version of the corpus; prints matcher precision and recall.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Output file (default: OUT_DIR/matches.tsv).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BootstrapArgs {
    /// Labeled seed set.
    #[arg(long)]
    seed: PathBuf,
    /// Unlabeled corpus (labels are ignored if present).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    refset: Option<PathBuf>,
    /// Labeled data scored after every iteration.
    #[arg(long)]
    held_out: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Skip the final sequence-level retraining.
    #[arg(long)]
    no_final: bool,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, value_enum)]
    decode: Option<DecodeName>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// CoNLL file (token column is used) or, with --raw, one sentence per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    raw: bool,
    /// Write per-token tag distributions instead of hard tags.
    #[arg(long)]
    soft: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SyntheticArgs {
    #[arg(long)]
    n_sentences: Option<usize>,
    #[arg(long)]
    n_names: Option<usize>,
    /// Fraction of names that double as ordinary words.
    #[arg(long)]
    ambiguity: Option<f64>,
    /// Fraction of mentions inside hyphenated compounds.
    #[arg(long)]
    hyphenation: Option<f64>,
    /// Also run the E1-E9 experiment grid.
    #[arg(long)]
    grid: bool,
    #[arg(long)]
    seed_frac: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    common: Common,
}

impl Common {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            types: self.types.clone(),
            rng_seed: self.rng_seed,
            out_dir: self.out_dir.clone(),
            ..Default::default()
        }
    }
}

impl PolicyArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.policy = self.policy;
        cfg.min_name_length = self.min_name_len;
        cfg.dictionary_path = self.dictionary.clone();
        if self.partial {
            cfg.allow_partial = Some(true);
        }
        if self.case_insensitive {
            cfg.case_sensitive = Some(false);
        }
    }
}

impl TrainArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.epochs = self.epochs;
        cfg.l2 = self.l2;
        cfg.learning_rate = self.learning_rate;
        cfg.decay = self.decay;
    }
}

impl Command {
    fn flags(&self) -> RunConfig {
        match self {
            Command::Split(a) => RunConfig {
                seed_frac: a.seed_frac,
                ..a.common.to_config()
            },
            Command::Match(a) => {
                let mut c = a.common.to_config();
                a.policy.apply(&mut c);
                c
            }
            Command::Bootstrap(a) => {
                let mut c = a.common.to_config();
                a.policy.apply(&mut c);
                a.train.apply(&mut c);
                c.iterations = a.iterations;
                if a.no_final {
                    c.final_retrain = Some(false);
                }
                c
            }
            Command::Eval(a) => RunConfig {
                decode: a.decode,
                ..Default::default()
            },
            Command::Predict(_) => RunConfig::default(),
            Command::Synthetic(a) => {
                let mut c = a.common.to_config();
                a.train.apply(&mut c);
                c.n_sentences = a.n_sentences;
                c.n_names = a.n_names;
                c.ambiguity_rate = a.ambiguity;
                c.hyphenation_rate = a.hyphenation;
                c.seed_frac = a.seed_frac;
                c.iterations = a.iterations;
                c
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let cfg = file.overlay(cli.command.flags());
    match &cli.command {
        Command::Split(a) => commands::split(&a.input, &cfg),
        Command::Match(a) => commands::match_names(
            &a.corpus,
            &a.refset,
            a.gold.as_deref(),
            a.out.as_deref(),
            &cfg,
        ),
        Command::Bootstrap(a) => commands::bootstrap(
            &a.seed,
            &a.corpus,
            a.refset.as_deref(),
            a.held_out.as_deref(),
            &cfg,
        ),
        Command::Eval(a) => commands::eval(&a.model, &a.gold, &cfg),
        Command::Predict(a) => {
            commands::predict(&a.model, &a.input, a.raw, a.soft, a.out.as_deref())
        }
        Command::Synthetic(a) => commands::synthetic(a.grid, &cfg),
    }
}

/// 1 for usage problems, 2 for bad or unreadable data, 3 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<refboot::Error>() {
            return match e {
                refboot::Error::FractionOutOfRange(_)
                | refboot::Error::InvalidConfig(_)
                | refboot::Error::SpecInvalid(_) => 1,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    3
}

/// The error chain joined with `: `, skipping causes already quoted by
/// their parent's message.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !msg.ends_with(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(3),
    }
}
