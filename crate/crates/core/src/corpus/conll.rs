use std::fs;
use std::path::Path;

use crate::corpus::{Dataset, DatasetKind, HardLabeling, Labeling, Sentence, TagSet};
use crate::error::{Error, IoContext, Result};

/// Parses two-column `token<TAB|SPACE>tag` text, sentences separated by
/// blank lines. A sentence whose lines all carry a single column is read as
/// unlabeled. `origin` names the source in error messages.
pub fn parse_conll(text: &str, tags: &TagSet, origin: &str) -> Result<Dataset> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut dataset = Dataset::new(tags.clone(), DatasetKind::Seed);
    let mut words: Vec<String> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut labeled: Option<bool> = None;

    let mut flush =
        |words: &mut Vec<String>, labels: &mut Vec<usize>, labeled: &mut Option<bool>| {
            if words.is_empty() {
                return Ok(());
            }
            let sentence = Sentence::from_tokens(words)?;
            let l = if labeled.unwrap_or(false) {
                Labeling::Hard(HardLabeling::new(std::mem::take(labels)))
            } else {
                Labeling::Unlabeled
            };
            dataset.push(sentence, l);
            words.clear();
            labels.clear();
            *labeled = None;
            Ok::<(), Error>(())
        };

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            flush(&mut words, &mut labels, &mut labeled)?;
            continue;
        }
        let malformed = |column: usize, reason: &str| Error::MalformedLine {
            path: origin.to_string(),
            line: lineno,
            column,
            reason: reason.to_string(),
        };
        let has_tag = match cols.len() {
            1 => false,
            2 => true,
            n => return Err(malformed(n, "expected token and tag columns")),
        };
        match labeled {
            None => labeled = Some(has_tag),
            Some(l) if l != has_tag => {
                return Err(malformed(cols.len(), "mixed labeled and unlabeled lines"))
            }
            _ => {}
        }
        words.push(cols[0].to_string());
        if has_tag {
            let tag = tags.index_of(cols[1]).ok_or_else(|| Error::UnknownTag {
                path: origin.to_string(),
                line: lineno,
                tag: cols[1].to_string(),
            })?;
            labels.push(tag);
        }
    }
    flush(&mut words, &mut labels, &mut labeled)?;

    if !dataset.is_fully_labeled() {
        dataset.kind = DatasetKind::Corpus;
    }
    Ok(dataset)
}

pub fn read_conll(path: impl AsRef<Path>, tags: &TagSet) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).with_path(path)?;
    parse_conll(&text, tags, &path.display().to_string())
}

/// Normalized rendering: tab separator, LF endings, one blank line after
/// each sentence. Soft labels are hardened; unlabeled sentences get a single
/// column.
pub fn render_conll(dataset: &Dataset) -> String {
    let mut out = String::new();
    for (sentence, labels) in dataset.sentences.iter().zip(&dataset.labels) {
        let hard = labels.to_hard();
        for (i, word) in sentence.words().enumerate() {
            out.push_str(word);
            if let Some(h) = &hard {
                out.push('\t');
                out.push_str(&dataset.tags.name(h.tags[i]));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn write_conll(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_conll(dataset)).with_path(path)
}
