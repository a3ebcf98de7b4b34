use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use refboot::bootstrap::{finalize, iterative_train_with, relabel, BootstrapConfig};
use refboot::corpus::{
    read_conll, render_conll, render_soft_tsv, split_seed, tokenize, write_conll, write_soft_tsv,
};
use refboot::eval::{
    evaluate, generate_synthetic, run_experiment_grid, Decode, GridConfig, SyntheticSpec,
};
use refboot::refset::{audit_matcher, find_matches, render_matches_tsv, AuditMode, PolicyConfig};
use refboot::{
    Dataset, DatasetKind, Labeling, ReferenceSet, TagSet, Tagger, TaggerModel, TrainConfig,
};

use crate::config::{usage, DecodeName, PolicyName, RunConfig};

fn policy_config(cfg: &RunConfig) -> Result<PolicyConfig> {
    let mut pc = match cfg.policy.unwrap_or(PolicyName::C1) {
        PolicyName::C1 => PolicyConfig::default(),
        PolicyName::C2 => PolicyConfig {
            case_sensitive: false,
            min_name_length: 4,
            dictionary_path: None,
            allow_partial: true,
        },
    };
    if let Some(v) = cfg.case_sensitive {
        pc.case_sensitive = v;
    }
    if let Some(v) = cfg.min_name_length {
        pc.min_name_length = v;
    }
    if let Some(v) = cfg.allow_partial {
        pc.allow_partial = v;
    }
    pc.dictionary_path = cfg.dictionary_path.clone();
    if cfg.policy == Some(PolicyName::C2) && pc.dictionary_path.is_none() {
        return Err(usage(
            "policy c2 filters dictionary words: pass --dictionary",
        ));
    }
    if pc.min_name_length == 0 {
        return Err(usage("--min-name-len must be at least 1"));
    }
    Ok(pc)
}

fn train_config(cfg: &RunConfig) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let tc = TrainConfig {
        epochs: cfg.epochs.unwrap_or(d.epochs),
        learning_rate: cfg.learning_rate.unwrap_or(d.learning_rate),
        decay: cfg.decay.unwrap_or(d.decay),
        l2: cfg.l2.unwrap_or(d.l2),
        seed: cfg.rng_seed(),
        ..d
    };
    tc.validate()?;
    Ok(tc)
}

fn fraction(value: Option<f64>, default: f64) -> Result<f64> {
    let f = value.unwrap_or(default);
    if !(f > 0.0 && f < 1.0) {
        return Err(refboot::Error::FractionOutOfRange(f).into());
    }
    Ok(f)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_labeled(path: &Path, tags: &TagSet) -> Result<Dataset> {
    let data = read_conll(path, tags)?;
    if let Some(i) = data
        .labels
        .iter()
        .position(|l| matches!(l, Labeling::Unlabeled))
    {
        return Err(refboot::Error::UnlabeledSentence(i))
            .with_context(|| format!("{} must be fully labeled", path.display()));
    }
    Ok(data)
}

pub fn split(input: &Path, cfg: &RunConfig) -> Result<()> {
    let frac = fraction(cfg.seed_frac, 0.03)?;
    let tags = TagSet::new(cfg.types());
    let out = cfg.out_dir();
    let data = read_labeled(input, &tags)?;
    let s = split_seed(&data, frac, cfg.rng_seed())?;
    create_dir(&out)?;
    write_conll(&s.seed, out.join("seed.conll"))?;
    write_conll(&s.corpus, out.join("corpus.conll"))?;
    write_conll(&s.hidden_gold, out.join("hidden_gold.conll"))?;
    println!(
        "seed: {} sentences, corpus: {} sentences",
        s.seed.len(),
        s.corpus.len()
    );
    Ok(())
}

fn entity_type(cfg: &RunConfig) -> String {
    cfg.entity_type
        .clone()
        .unwrap_or_else(|| cfg.types()[0].clone())
}

pub fn match_names(
    corpus: &Path,
    refset: &Path,
    gold: Option<&Path>,
    out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<()> {
    let pc = policy_config(cfg)?;
    let tags = TagSet::new(cfg.types());
    let etype = entity_type(cfg);
    if tags.type_index(&etype).is_none() {
        return Err(usage(format!("entity type {etype} is not in {tags}")));
    }
    let out = out.map_or_else(|| cfg.out_dir().join("matches.tsv"), Path::to_path_buf);

    let corpus = read_conll(corpus, &tags)?;
    let refset = ReferenceSet::load(refset, &etype)?;
    let gold = gold.map(|g| read_labeled(g, &tags)).transpose()?;
    let policy = pc.into_policy(None)?;
    let filtered = refset.filter(&policy);
    let matches = find_matches(&corpus, &filtered, &policy);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_file(&out, &render_matches_tsv(&matches))?;
    println!(
        "names: {} ({} after filtering), matches: {}",
        refset.len(),
        filtered.len(),
        matches.len()
    );
    if let Some(gold) = gold {
        let a = audit_matcher(&matches, &gold, AuditMode::Exact)?;
        println!(
            "matcher P={:.2} R={:.2} (tp={} fp={} fn={})",
            100.0 * a.precision,
            100.0 * a.recall,
            a.true_positives,
            a.false_positives,
            a.false_negatives
        );
    }
    Ok(())
}

pub fn bootstrap(
    seed: &Path,
    corpus: &Path,
    refset: Option<&Path>,
    held_out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<()> {
    let pc = policy_config(cfg)?;
    let train = train_config(cfg)?;
    let tags = TagSet::new(cfg.types());
    let etype = entity_type(cfg);
    let out = cfg.out_dir();

    let seed = read_labeled(seed, &tags)?;
    let corpus = read_conll(corpus, &tags)?.unlabeled();
    let reference = refset.map(|r| ReferenceSet::load(r, &etype)).transpose()?;
    let held_out = held_out.map(|h| read_labeled(h, &tags)).transpose()?;
    let boot = BootstrapConfig {
        iterations: cfg.iterations.unwrap_or(10),
        train,
        final_retrain: cfg.final_retrain.unwrap_or(true),
        reference,
        policy: pc.into_policy(None)?,
        extra_pins: Vec::new(),
        held_out,
    };

    let checkpoints = out.join("checkpoints");
    create_dir(&checkpoints)?;
    let (m_k, trace) = iterative_train_with(&seed, &corpus, &boot, |_, model, record| {
        model.save(checkpoints.join(&record.checkpoint))
    })?;
    write_file(&checkpoints.join("trace.tsv"), &trace.to_tsv())?;
    let pins = boot.pins(&corpus);
    write_file(&out.join("matches.tsv"), &render_matches_tsv(&pins))?;
    write_soft_tsv(&relabel(&corpus, &m_k, &pins)?, out.join("corpus.soft.tsv"))?;
    let model = finalize(&m_k, &seed, &corpus, &boot)?;
    model.save(out.join("model.json"))?;

    print!("{}", trace.to_tsv());
    println!("pinned spans: {}", pins.len());
    if let Some(h) = &boot.held_out {
        let decode = if boot.final_retrain {
            Decode::Viterbi
        } else {
            Decode::Marginal
        };
        println!("final model: {}", evaluate(&model, h, decode)?);
    }
    println!(
        "wrote {} checkpoints and model.json to {}",
        trace.len(),
        out.display()
    );
    Ok(())
}

fn decode_of(cfg: &RunConfig) -> Decode {
    match cfg.decode.unwrap_or(DecodeName::Viterbi) {
        DecodeName::Viterbi => Decode::Viterbi,
        DecodeName::Marginal => Decode::Marginal,
    }
}

pub fn eval(model: &Path, gold: &Path, cfg: &RunConfig) -> Result<()> {
    let decode = decode_of(cfg);
    let model = TaggerModel::load(model)?;
    let gold =
        read_labeled(gold, model.tags()).context("gold labels do not fit the model's tag set")?;
    let r = evaluate(&model, &gold, decode)?;
    println!("{r}");
    println!(
        "tp={} fp={} fn={} token_accuracy={:.2}",
        r.true_positives,
        r.false_positives,
        r.false_negatives,
        100.0 * r.token_accuracy.unwrap_or(0.0)
    );
    Ok(())
}

pub fn predict(
    model: &Path,
    input: &Path,
    raw: bool,
    soft: bool,
    out: Option<&Path>,
) -> Result<()> {
    let model = TaggerModel::load(model)?;
    let mut data = if raw {
        let text = fs::read_to_string(input)
            .with_context(|| format!("cannot read {}", input.display()))?;
        let mut d = Dataset::new(model.tags().clone(), DatasetKind::Corpus);
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            d.push(tokenize(line)?, Labeling::Unlabeled);
        }
        d
    } else {
        read_conll(input, model.tags())?.unlabeled()
    };
    for (s, l) in data.sentences.iter().zip(data.labels.iter_mut()) {
        *l = if soft {
            Labeling::Soft(model.predict_soft(s))
        } else {
            Labeling::Hard(model.predict_hard(s))
        };
    }
    let text = if soft {
        render_soft_tsv(&data)?
    } else {
        render_conll(&data)
    };
    match out {
        Some(p) => write_file(p, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

pub fn synthetic(grid: bool, cfg: &RunConfig) -> Result<()> {
    let d = SyntheticSpec::default();
    let spec = SyntheticSpec {
        n_sentences: cfg.n_sentences.unwrap_or(d.n_sentences),
        n_names: cfg.n_names.unwrap_or(d.n_names),
        n_context_words: cfg.n_context_words.unwrap_or(d.n_context_words),
        ambiguity_rate: cfg.ambiguity_rate.unwrap_or(d.ambiguity_rate),
        hyphenation_rate: cfg.hyphenation_rate.unwrap_or(d.hyphenation_rate),
        case_variation_rate: cfg.case_variation_rate.unwrap_or(d.case_variation_rate),
        short_name_rate: cfg.short_name_rate.unwrap_or(d.short_name_rate),
        entity_type: entity_type(cfg),
        seed: cfg.rng_seed(),
        ..d
    };
    spec.validate()?;
    let grid_cfg = GridConfig {
        test_fraction: fraction(cfg.test_fraction, 0.2)?,
        seed_fraction: fraction(cfg.seed_frac, 0.03)?,
        rng_seed: cfg.rng_seed(),
        iterations: cfg.iterations.unwrap_or(10),
        train: train_config(cfg)?,
        ..Default::default()
    };
    let out = cfg.out_dir();

    let s = generate_synthetic(&spec)?;
    create_dir(&out)?;
    write_conll(&s.gold, out.join("gold.conll"))?;
    let lines =
        |it: &mut dyn Iterator<Item = &str>| it.map(|w| format!("{w}\n")).collect::<String>();
    write_file(&out.join("refset.txt"), &lines(&mut s.reference.names()))?;
    write_file(
        &out.join("dictionary.txt"),
        &lines(&mut s.dictionary.sorted_words().into_iter()),
    )?;
    println!(
        "{} sentences, {} names ({} ambiguous), {} dictionary words",
        s.gold.len(),
        s.reference.len(),
        s.ambiguous_names.len(),
        s.dictionary.len()
    );
    if !grid {
        return Ok(());
    }

    let report = run_experiment_grid(&s.gold, &s.reference, &s.dictionary, &grid_cfg)?;
    write_file(&out.join("grid.tsv"), &report.to_tsv())?;
    write_file(&out.join("grid.txt"), &report.to_table())?;
    let models: PathBuf = out.join("models");
    let traces: PathBuf = out.join("traces");
    create_dir(&models)?;
    create_dir(&traces)?;
    for row in &report.rows {
        let id = &row.condition.id;
        row.model.save(models.join(format!("{id}.json")))?;
        if let Some(t) = &row.trace {
            write_file(&traces.join(format!("{id}.tsv")), &t.to_tsv())?;
        }
    }
    print!("{}", report.to_table());
    Ok(())
}
