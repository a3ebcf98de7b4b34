use crate::corpus::{Sentence, Token};
use crate::error::{Error, Result};

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_connector(c: char) -> bool {
    c == '-' || c == '/'
}

/// Splits `text` into tokens with character offsets.
///
/// Whitespace separates chunks. Inside a chunk, runs of word characters form
/// tokens and every other character becomes a single-character token, except
/// hyphens and slashes sitting between two word characters, which stay inside
/// the surrounding token (`Flag-tagged-TIGAR`, `IL-2/IL-4`).
pub fn tokenize(text: &str) -> Result<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_word_char(c) {
            i += 1;
            while i < chars.len() {
                if is_word_char(chars[i]) {
                    i += 1;
                } else if is_connector(chars[i])
                    && i + 1 < chars.len()
                    && is_word_char(chars[i + 1])
                {
                    i += 2;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        tokens.push(Token {
            text: chars[start..i].iter().collect(),
            start,
            end: i,
        });
    }
    if tokens.is_empty() {
        return Err(Error::EmptySentence);
    }
    Ok(Sentence {
        tokens,
        source: text.to_string(),
    })
}
