use std::fs;
use std::path::Path;

use crate::corpus::{
    repair, Dataset, DatasetKind, HardLabeling, Labeling, Provenance, Sentence, SoftLabeling,
    TagSet,
};
use crate::error::{Error, IoContext, Result};

/// One-hot soft labeling of a hard labeling, provenance `SEED`.
pub fn soften(labels: &HardLabeling, tags: &TagSet) -> SoftLabeling {
    let dist = labels
        .tags
        .iter()
        .map(|&t| {
            let mut row = vec![0.0; tags.len()];
            row[t] = 1.0;
            row
        })
        .collect();
    SoftLabeling {
        dist,
        provenance: vec![Provenance::Seed; labels.len()],
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate().skip(1) {
        if p > row[best] {
            best = i;
        }
    }
    best
}

/// Per-token argmax (lowest index on ties) followed by BIO repair.
pub fn harden(soft: &SoftLabeling) -> HardLabeling {
    let raw = HardLabeling::new(soft.dist.iter().map(|r| argmax(r)).collect());
    let n_tags = soft.dist.first().map_or(1, Vec::len);
    // tag sets always have an odd size: O plus a B/I pair per type
    let types: Vec<String> = (0..(n_tags.saturating_sub(1)) / 2)
        .map(|i| i.to_string())
        .collect();
    repair(&raw, &TagSet::new(types))
}

/// Soft-label TSV: `token<TAB>provenance<TAB>p_0 ... p_{T-1}` per line, one
/// blank line after each sentence. Probabilities use the shortest decimal
/// form that reads back to the same `f64`.
pub fn render_soft_tsv(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    for (i, (sentence, labels)) in dataset.sentences.iter().zip(&dataset.labels).enumerate() {
        let soft = match labels {
            Labeling::Soft(s) => s.clone(),
            Labeling::Hard(h) => soften(h, &dataset.tags),
            Labeling::Unlabeled => return Err(Error::UnlabeledSentence(i)),
        };
        for (k, word) in sentence.words().enumerate() {
            out.push_str(word);
            out.push('\t');
            out.push_str(soft.provenance[k].as_str());
            for p in &soft.dist[k] {
                out.push('\t');
                out.push_str(&p.to_string());
            }
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_soft_tsv(text: &str, tags: &TagSet, origin: &str) -> Result<Dataset> {
    let mut dataset = Dataset::new(tags.clone(), DatasetKind::Corpus);
    let mut words: Vec<String> = Vec::new();
    let mut soft = SoftLabeling::default();
    let n_cols = 2 + tags.len();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            if !words.is_empty() {
                let s = Sentence::from_tokens(&words)?;
                dataset.push(s, Labeling::Soft(std::mem::take(&mut soft)));
                words.clear();
            }
            continue;
        }
        let malformed = |column: usize, reason: String| Error::MalformedLine {
            path: origin.to_string(),
            line: lineno,
            column,
            reason,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != n_cols {
            return Err(malformed(cols.len(), format!("expected {n_cols} columns")));
        }
        let prov = Provenance::parse(cols[1])
            .ok_or_else(|| malformed(2, format!("bad provenance `{}`", cols[1])))?;
        let row = cols[2..]
            .iter()
            .enumerate()
            .map(|(c, v)| {
                v.parse::<f64>()
                    .map_err(|e| malformed(c + 3, format!("bad probability `{v}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        words.push(cols[0].to_string());
        soft.dist.push(row);
        soft.provenance.push(prov);
    }
    if !words.is_empty() {
        let s = Sentence::from_tokens(&words)?;
        dataset.push(s, Labeling::Soft(soft));
    }
    Ok(dataset)
}

pub fn write_soft_tsv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_soft_tsv(dataset)?).with_path(path)
}

pub fn read_soft_tsv(path: impl AsRef<Path>, tags: &TagSet) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).with_path(path)?;
    parse_soft_tsv(&text, tags, &path.display().to_string())
}
