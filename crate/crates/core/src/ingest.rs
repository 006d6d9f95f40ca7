//! FASTA and plain-text input.

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqRecord {
    pub id: String,
    /// Uppercase bases over `ACGTN`.
    pub sequence: String,
    pub category: Option<String>,
    pub source: String,
    pub index: usize,
}

/// Per-file parse statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastaStats {
    /// `U`/`u` bases rewritten to `T`.
    pub uracil_converted: usize,
}

/// Parses FASTA from a reader. `source` is only used for provenance and
/// error messages.
pub fn parse_fasta<R: Read>(reader: R, source: &str, category: Option<&str>) -> Result<(Vec<SeqRecord>, FastaStats)> {
    let mut records: Vec<SeqRecord> = Vec::new();
    let mut stats = FastaStats::default();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Encoding(source.into()),
            _ => Error::io(source, e),
        })?;
        let line = line.trim_end_matches('\r');
        if let Some(header) = line.strip_prefix('>') {
            records.push(SeqRecord {
                id: header.trim().to_owned(),
                sequence: String::new(),
                category: category.map(str::to_owned),
                source: source.to_owned(),
                index: records.len(),
            });
            continue;
        }
        let Some(record) = records.last_mut() else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Parse(format!(
                "{source}:{}: sequence data before the first '>' header",
                lineno + 1
            )));
        };
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            let base = match c.to_ascii_uppercase() {
                b @ ('A' | 'C' | 'G' | 'T' | 'N') => b,
                'U' => {
                    stats.uracil_converted += 1;
                    'T'
                }
                _ => {
                    return Err(Error::InvalidBase {
                        ch: c,
                        line: lineno + 1,
                    })
                }
            };
            record.sequence.push(base);
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyFile(source.into()));
    }
    if let Some(r) = records.iter().find(|r| r.sequence.is_empty()) {
        return Err(Error::Parse(format!("{source}: record {:?} has no sequence", r.id)));
    }
    Ok((records, stats))
}

pub fn read_fasta(path: impl AsRef<Path>, category: Option<&str>) -> Result<(Vec<SeqRecord>, FastaStats)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_fasta(file, &path.display().to_string(), category)
}

/// Reads UTF-8 text with line endings normalized to `\n`.
pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Encoding(path.into()))?;
    Ok(normalize_newlines(&text))
}

pub fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}
