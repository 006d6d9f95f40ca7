//! Zipf-generating random processes and the statistics used to compare them.
//!
//! * [`generators`]: a power-law die and a Markov control chain.
//! * [`facgrammar`]: the factorial-tree grammar with exact word marginals.
//! * [`tokenize`] and [`ingest`]: text, FASTA, n-mers, pseudo-words.
//! * [`rankstats`]: log-log rank-frequency fits and entropy.
//! * [`hypothesis`]: bootstrap, Welch and permutation tests on exponents.
//!
//! Statistical code is generic over [`Real`]; the aliases below fix it to
//! `f64` (or `f32`) for everyday use.

pub mod corpus;
pub mod error;
pub mod facgrammar;
pub mod generators;
pub mod hypothesis;
pub mod ingest;
pub mod rankstats;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod tokenize;

pub use corpus::{build_rank_table, Corpus, CorpusMeta, Interner, RankEntry, RankTable, Token, TokenId};
pub use error::{Error, ErrorFamily, Result};
pub use facgrammar::{
    allocate, build_grammar, enumerate_all, path_fraction, prefix_rank, sample_sentence, zipf_targets, GrammarSpec,
    PathSample,
};
pub use generators::{die_stream, make_die, markov_stream};
pub use hypothesis::{bootstrap_xi, permutation_test, welch_test, Method, ResampleUnit};
pub use ingest::{read_fasta, read_text, SeqRecord};
pub use rankstats::{fit_zipf, shannon_entropy, zipf_entropy, FitParams};
pub use scalar::Real;
pub use tokenize::{tokenize_delimited, tokenize_nmers, tokenize_words, TokenizerConfig, Window};

pub type DieSpec = generators::DieSpec<f64>;
pub type MarkovSpec = generators::MarkovSpec<f64>;
pub type ZipfFit = rankstats::ZipfFit<f64>;
pub type EntropyReport = rankstats::EntropyReport<f64>;
pub type AnalysisReport = rankstats::AnalysisReport<f64>;
pub type TestReport = hypothesis::TestReport<f64>;
pub type BootstrapReport = hypothesis::BootstrapReport<f64>;

pub type DieSpec32 = generators::DieSpec<f32>;
pub type ZipfFit32 = rankstats::ZipfFit<f32>;
pub type EntropyReport32 = rankstats::EntropyReport<f32>;
