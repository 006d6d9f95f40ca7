//! Tokens, corpora and the rank-frequency table.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense token identifier, assigned in first-seen order by an [`Interner`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenId(pub u32);

impl TokenId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A borrowed view of an interned token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub id: TokenId,
    pub surface: &'a str,
}

/// Bijective surface <-> id table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    surfaces: Vec<String>,
    ids: HashMap<String, TokenId>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `surface`, assigning the next dense id if unseen.
    pub fn intern(&mut self, surface: &str) -> Result<TokenId> {
        if surface.is_empty() {
            return Err(Error::InvalidToken("empty surface".into()));
        }
        if let Some(&id) = self.ids.get(surface) {
            return Ok(id);
        }
        let id = u32::try_from(self.surfaces.len())
            .map(TokenId)
            .map_err(|_| Error::CapacityExceeded("more than 2^32 distinct tokens".into()))?;
        self.surfaces.push(surface.to_owned());
        self.ids.insert(surface.to_owned(), id);
        Ok(id)
    }

    pub fn get(&self, id: TokenId) -> Option<Token<'_>> {
        self.surfaces.get(id.index()).map(|s| Token { id, surface: s })
    }

    pub fn surface(&self, id: TokenId) -> &str {
        &self.surfaces[id.index()]
    }

    pub fn lookup(&self, surface: &str) -> Option<TokenId> {
        self.ids.get(surface).copied()
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Token<'_>> {
        self.surfaces.iter().enumerate().map(|(i, s)| Token {
            id: TokenId(i as u32),
            surface: s,
        })
    }
}

/// Provenance of a corpus, written as the JSON sidecar next to its text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    /// Short kind tag: `die`, `markov`, `grammar`, `text`, `fasta`, ...
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<serde_json::Value>,
}

impl CorpusMeta {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            ..Self::default()
        }
    }
}

/// An ordered collection of sentences over an interning table.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Vec<TokenId>>,
    pub intern: Interner,
    pub meta: CorpusMeta,
}

impl Corpus {
    pub fn new(meta: CorpusMeta) -> Self {
        Self {
            sentences: Vec::new(),
            intern: Interner::new(),
            meta,
        }
    }

    /// Appends a sentence given as surfaces.
    pub fn push_sentence<S: AsRef<str>>(&mut self, words: &[S]) -> Result<()> {
        let ids = words
            .iter()
            .map(|w| self.intern.intern(w.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.sentences.push(ids);
        Ok(())
    }

    pub fn token_count(&self) -> u64 {
        self.sentences.iter().map(|s| s.len() as u64).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.sentences.iter().flatten().copied()
    }

    pub fn sentence_surfaces(&self, idx: usize) -> Vec<&str> {
        self.sentences[idx].iter().map(|&id| self.intern.surface(id)).collect()
    }

    /// Occurrence count per token id.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.intern.len()];
        for id in self.tokens() {
            counts[id.index()] += 1;
        }
        counts
    }

    /// One sentence per line, tokens joined by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for sentence in &self.sentences {
            for (i, &id) in sentence.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(self.intern.surface(id));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the line-oriented text form. Every line is a sentence, empty
    /// lines included.
    pub fn from_text(text: &str, meta: CorpusMeta) -> Result<Self> {
        let mut corpus = Corpus::new(meta);
        for line in text.lines() {
            let words: Vec<&str> = line.split(' ').filter(|w| !w.is_empty()).collect();
            corpus.push_sentence(&words)?;
        }
        Ok(corpus)
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("metadata serializes")
    }
}

/// One row of a [`RankTable`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub id: TokenId,
    pub surface: String,
    pub count: u64,
    pub rank: usize,
}

/// Words sorted by descending count, ranks 1..V.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub entries: Vec<RankEntry>,
    pub total: u64,
}

impl RankTable {
    /// Builds a table from (surface, count) pairs; zero counts are dropped.
    /// Ids follow the input order.
    pub fn from_counts<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u64)>) -> Result<Self> {
        let rows = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (s, c))| (TokenId(i as u32), s.into(), c))
            .collect();
        Self::from_rows(rows)
    }

    fn from_rows(mut rows: Vec<(TokenId, String, u64)>) -> Result<Self> {
        rows.retain(|r| r.2 > 0);
        if rows.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        rows.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.1.cmp(&b.1)));
        let total = rows.iter().map(|r| r.2).sum();
        let entries = rows
            .into_iter()
            .enumerate()
            .map(|(i, (id, surface, count))| RankEntry {
                id,
                surface,
                count,
                rank: i + 1,
            })
            .collect();
        Ok(Self { entries, total })
    }

    pub fn vocab(&self) -> usize {
        self.entries.len()
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.count)
    }

    /// CSV with header `rank,surface,count,freq`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,surface,count,freq\n");
        for e in &self.entries {
            let freq = e.count as f64 / self.total as f64;
            writeln!(out, "{},{},{},{}", e.rank, csv_field(&e.surface), e.count, freq).unwrap();
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Counts every token and ranks by descending count, ties broken by
/// ascending surface.
pub fn build_rank_table(corpus: &Corpus) -> Result<RankTable> {
    if corpus.token_count() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let rows = corpus
        .counts()
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let id = TokenId(i as u32);
            (id, corpus.intern.surface(id).to_owned(), c)
        })
        .collect();
    RankTable::from_rows(rows)
}
