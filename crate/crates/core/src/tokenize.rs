//! Raw text and base sequences to corpora: whitespace words, DNA n-mers and
//! delimiter-bounded pseudo-words.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusMeta};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Words,
    Nmer,
    Delimiter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Sliding,
    Disjoint,
}

/// What to do with characters outside `ACGT` in n-mer mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvalidBasePolicy {
    Error,
    SkipCharacter,
    /// The offending character ends the current run; no n-mer spans it.
    BreakSequence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub mode: Mode,
    pub n: usize,
    pub window: Window,
    pub delimiter: char,
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub invalid_base: InvalidBasePolicy,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Words,
            n: 6,
            window: Window::Sliding,
            delimiter: 'e',
            lowercase: false,
            strip_punctuation: false,
            invalid_base: InvalidBasePolicy::BreakSequence,
        }
    }
}

impl TokenizerConfig {
    pub fn words() -> Self {
        Self::default()
    }

    pub fn nmer(n: usize, window: Window) -> Self {
        Self {
            mode: Mode::Nmer,
            n,
            window,
            ..Self::default()
        }
    }

    pub fn delimited(delimiter: char) -> Self {
        Self {
            mode: Mode::Delimiter,
            delimiter,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::Nmer && self.n == 0 {
            return Err(Error::InvalidSpec("n-mer length must be >= 1".into()));
        }
        Ok(())
    }

    /// Tokenizes a whole text (one sentence per line for words mode, a
    /// single stream otherwise).
    pub fn tokenize(&self, text: &str) -> Result<Corpus> {
        self.validate()?;
        let mut corpus = match self.mode {
            Mode::Words => tokenize_words(text, self)?,
            Mode::Nmer => tokenize_nmers_with(text, self.n, self.window, self.invalid_base)?,
            Mode::Delimiter => tokenize_delimited(text, self.delimiter)?,
        };
        corpus.meta.tokenizer = Some(serde_json::to_value(self).expect("config serializes"));
        Ok(corpus)
    }

    /// Tokenizes each sequence as its own sentence; n-mers never span two
    /// sequences.
    pub fn tokenize_sequences<S: AsRef<str>>(&self, seqs: &[S]) -> Result<Corpus> {
        self.validate()?;
        let mut corpus = Corpus::new(CorpusMeta::new(self.mode_name()));
        let mut too_short = None;
        for seq in seqs {
            let seq = seq.as_ref();
            match nmer_tokens(seq, self.n, self.window, self.invalid_base) {
                Ok(tokens) => corpus.push_sentence(&tokens)?,
                Err(e @ Error::SequenceTooShort { .. }) => too_short = Some(e),
                Err(e) => return Err(e),
            }
        }
        if corpus.token_count() == 0 {
            return Err(too_short.unwrap_or(Error::EmptyCorpus));
        }
        corpus.meta.tokenizer = Some(serde_json::to_value(self).expect("config serializes"));
        Ok(corpus)
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Words => "words",
            Mode::Nmer => "nmer",
            Mode::Delimiter => "delimiter",
        }
    }
}

/// Newline-separated sentences of whitespace-separated words. Blank lines
/// are skipped.
pub fn tokenize_words(text: &str, config: &TokenizerConfig) -> Result<Corpus> {
    let mut corpus = Corpus::new(CorpusMeta::new("words"));
    for line in text.lines() {
        let mut line = line.to_owned();
        if config.lowercase {
            line = line.to_lowercase();
        }
        if config.strip_punctuation {
            line.retain(|c| !c.is_ascii_punctuation());
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if !words.is_empty() {
            corpus.push_sentence(&words)?;
        }
    }
    if corpus.token_count() == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(corpus)
}

fn is_base(c: char) -> bool {
    matches!(c, 'A' | 'C' | 'G' | 'T')
}

/// Splits a base string into valid runs according to `policy`. Case is
/// folded to upper.
fn base_runs(seq: &str, policy: InvalidBasePolicy) -> Result<Vec<String>> {
    let mut runs = vec![String::new()];
    let mut line = 1;
    for c in seq.chars() {
        if c == '\n' {
            line += 1;
        }
        if c.is_whitespace() {
            continue;
        }
        let c = c.to_ascii_uppercase();
        if is_base(c) {
            runs.last_mut().unwrap().push(c);
            continue;
        }
        match policy {
            InvalidBasePolicy::Error => return Err(Error::InvalidBase { ch: c, line }),
            InvalidBasePolicy::SkipCharacter => {}
            InvalidBasePolicy::BreakSequence => {
                if !runs.last().unwrap().is_empty() {
                    runs.push(String::new());
                }
            }
        }
    }
    runs.retain(|r| !r.is_empty());
    Ok(runs)
}

fn nmer_tokens(seq: &str, n: usize, window: Window, policy: InvalidBasePolicy) -> Result<Vec<String>> {
    if n == 0 {
        return Err(Error::InvalidSpec("n-mer length must be >= 1".into()));
    }
    let runs = base_runs(seq, policy)?;
    let mut tokens = Vec::new();
    for run in &runs {
        let bytes = run.as_bytes();
        if bytes.len() < n {
            continue;
        }
        let starts: Box<dyn Iterator<Item = usize>> = match window {
            Window::Sliding => Box::new(0..=bytes.len() - n),
            Window::Disjoint => Box::new((0..bytes.len() / n).map(|b| b * n)),
        };
        tokens.extend(starts.map(|i| run[i..i + n].to_owned()));
    }
    if tokens.is_empty() {
        let len = runs.iter().map(String::len).max().unwrap_or(0);
        return Err(Error::SequenceTooShort { len, n });
    }
    Ok(tokens)
}

/// Fixed-length n-mers of a base sequence as a single sentence, with the
/// default break-sequence policy for non-`ACGT` characters.
pub fn tokenize_nmers(seq: &str, n: usize, window: Window) -> Result<Corpus> {
    tokenize_nmers_with(seq, n, window, InvalidBasePolicy::BreakSequence)
}

pub fn tokenize_nmers_with(seq: &str, n: usize, window: Window, policy: InvalidBasePolicy) -> Result<Corpus> {
    let tokens = nmer_tokens(seq, n, window, policy)?;
    let mut corpus = Corpus::new(CorpusMeta::new("nmer"));
    corpus.push_sentence(&tokens)?;
    Ok(corpus)
}

/// Byte ranges of delimiter-bounded pseudo-words. Each token runs from one
/// delimiter occurrence to the next, inclusive; the closing delimiter of a
/// token opens the following one.
pub fn delimited_spans(text: &str, delimiter: char) -> Vec<(usize, usize)> {
    let positions: Vec<usize> = text.match_indices(delimiter).map(|(i, _)| i).collect();
    positions
        .windows(2)
        .map(|w| (w[0], w[1] + delimiter.len_utf8()))
        .collect()
}

pub fn tokenize_delimited(text: &str, delimiter: char) -> Result<Corpus> {
    let spans = delimited_spans(text, delimiter);
    if spans.is_empty() {
        return Err(Error::NoTokens(delimiter));
    }
    let tokens: Vec<&str> = spans.iter().map(|&(a, b)| &text[a..b]).collect();
    let mut corpus = Corpus::new(CorpusMeta::new("delimiter"));
    corpus.push_sentence(&tokens)?;
    Ok(corpus)
}
