use std::fs;
use std::path::Path;

use zipfkit::ingest::{normalize_newlines, parse_fasta};
use zipfkit::tokenize::Mode;
use zipfkit::{Corpus, CorpusMeta, Error, Result, TokenizerConfig};

use crate::args::{InputFormat, TokenizerArgs};
use crate::output::{sha256_hex, InputDigest};

#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub corpus: Corpus,
    pub digest: InputDigest,
    pub tokenizer: TokenizerConfig,
}

/// Reads, digests and tokenizes one input file. `display` is the path as
/// recorded in reports.
pub fn load_input(path: &Path, display: &str, args: &TokenizerArgs) -> Result<LoadedInput> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let sha256 = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| Error::Encoding(path.into()))?;
    let fasta = match args.input_format {
        InputFormat::Fasta => true,
        InputFormat::Text => false,
        InputFormat::Auto => text.trim_start().starts_with('>'),
    };
    let tokenizer = args.config(fasta);
    let (mut corpus, records, uracil) = if fasta {
        if tokenizer.mode != Mode::Nmer {
            return Err(Error::InvalidSpec(format!(
                "{display}: FASTA input needs the nmer tokenizer"
            )));
        }
        let (recs, stats) = parse_fasta(text.as_bytes(), display, None)?;
        let seqs: Vec<&str> = recs.iter().map(|r| r.sequence.as_str()).collect();
        let corpus = tokenizer.tokenize_sequences(&seqs)?;
        (corpus, Some(recs.len()), Some(stats.uracil_converted))
    } else {
        (tokenizer.tokenize(&normalize_newlines(&text))?, None, None)
    };
    let format = if fasta { "fasta" } else { "text" };
    corpus.meta.source = format.into();
    corpus.meta.path = Some(display.to_owned());
    Ok(LoadedInput {
        corpus,
        digest: InputDigest {
            path: display.to_owned(),
            sha256,
            format: format.into(),
            records,
            uracil_converted: uracil,
        },
        tokenizer,
    })
}

/// Concatenates corpora sentence by sentence into one.
pub fn pool<'a>(corpora: impl IntoIterator<Item = &'a Corpus>, meta: CorpusMeta) -> Result<Corpus> {
    let mut out = Corpus::new(meta);
    for c in corpora {
        for i in 0..c.sentences.len() {
            out.push_sentence(&c.sentence_surfaces(i))?;
        }
    }
    Ok(out)
}
