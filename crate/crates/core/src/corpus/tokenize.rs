//! Tokenization and case normalization.
//!
//! The word tokenizer is a rule-based treebank-style scanner:
//! - whitespace separates tokens;
//! - `[ ] ( ) { } , ! ? ; : "` are always standalone single-character tokens;
//! - `.` is standalone unless it sits between two digits (`3.5` stays whole);
//! - an apostrophe starts a new token, splitting contractions (`it's` →
//!   `it`, `'s`);
//! - everything else (letters, digits, hyphens, currency signs) stays
//!   in-word, so `family-friendly` and `AGENT-1` are single tokens.
//!
//! Character mode emits one token per Unicode scalar value, spaces included.

/// Symbol granularity used throughout the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenMode {
    Word,
    Char,
}

impl TokenMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenMode::Word => "word",
            TokenMode::Char => "char",
        }
    }

    pub fn from_str_opt(s: &str) -> Option<Self> {
        match s {
            "word" => Some(TokenMode::Word),
            "char" => Some(TokenMode::Char),
            _ => None,
        }
    }

    /// Glue tokens back into a surface string: words joined by spaces,
    /// characters joined directly.
    pub fn join(self, tokens: &[String]) -> String {
        match self {
            TokenMode::Word => tokens.join(" "),
            TokenMode::Char => tokens.concat(),
        }
    }
}

const STANDALONE: &[char] = &['[', ']', '(', ')', '{', '}', ',', '!', '?', ';', ':', '"'];

pub fn tokenize(text: &str, mode: TokenMode) -> Vec<String> {
    match mode {
        TokenMode::Word => word_tokenize(text),
        TokenMode::Char => text.chars().map(String::from).collect(),
    }
}

fn word_tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens: Vec<String> = Vec::new();
    let mut buf = String::new();
    let flush = |buf: &mut String, tokens: &mut Vec<String>| {
        if !buf.is_empty() {
            tokens.push(std::mem::take(buf));
        }
    };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            flush(&mut buf, &mut tokens);
        } else if STANDALONE.contains(&c) {
            flush(&mut buf, &mut tokens);
            tokens.push(c.to_string());
        } else if c == '.' {
            let prev_digit = buf.chars().last().is_some_and(|p| p.is_ascii_digit());
            let next_digit = chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
            if prev_digit && next_digit {
                buf.push(c);
            } else {
                flush(&mut buf, &mut tokens);
                tokens.push(c.to_string());
            }
        } else if c == '\'' {
            flush(&mut buf, &mut tokens);
            buf.push(c);
        } else {
            buf.push(c);
        }
        i += 1;
    }
    flush(&mut buf, &mut tokens);
    tokens
}

/// True for the placeholder tokens introduced by delexicalization:
/// `NAME`, `NEAR`, `AGENT-n`, `PATIENT-n`, `BRIDGE-n`.
pub fn is_placeholder(token: &str) -> bool {
    if token == "NAME" || token == "NEAR" {
        return true;
    }
    for role in ["AGENT-", "PATIENT-", "BRIDGE-"] {
        if let Some(num) = token.strip_prefix(role) {
            return !num.is_empty() && num.bytes().all(|b| b.is_ascii_digit());
        }
    }
    false
}

/// Lowercase a string while leaving placeholder tokens untouched.
///
/// A "token" here is a maximal run of alphanumerics and hyphens; only runs
/// that exactly equal a placeholder keep their case.
pub fn lowercase_keep_placeholders(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut run = String::new();
    let flush = |run: &mut String, out: &mut String| {
        if !run.is_empty() {
            if is_placeholder(run) {
                out.push_str(run);
            } else {
                out.extend(run.chars().flat_map(char::to_lowercase));
            }
            run.clear();
        }
    };
    for c in text.chars() {
        if c.is_alphanumeric() || c == '-' {
            run.push(c);
        } else {
            flush(&mut run, &mut out);
            out.extend(c.to_lowercase());
        }
    }
    flush(&mut run, &mut out);
    out
}

/// Split a text into sentences: a sentence ends at a run of `. ! ?`
/// (the run stays attached) followed by whitespace or end of text.
/// Sentences are trimmed; empty pieces are dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            let mut j = i;
            while j + 1 < chars.len() && matches!(chars[j + 1], '.' | '!' | '?') {
                j += 1;
            }
            let boundary = j + 1 >= chars.len() || chars[j + 1].is_whitespace();
            if boundary {
                let s: String = chars[start..=j].iter().collect();
                let s = s.trim();
                if !s.is_empty() {
                    sentences.push(s.to_string());
                }
                start = j + 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        let s: String = chars[start..].iter().collect();
        let s = s.trim();
        if !s.is_empty() {
            sentences.push(s.to_string());
        }
    }
    sentences
}
