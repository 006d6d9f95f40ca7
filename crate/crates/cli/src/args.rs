use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use zipfkit::tokenize::{InvalidBasePolicy, Mode, TokenizerConfig, Window};
use zipfkit::FitParams;

#[derive(Debug, Parser)]
#[command(
    name = "zipfkit",
    version,
    about = "Zipf-law corpora, rank-frequency statistics and exponent tests"
)]
pub struct Cli {
    /// Seed for every random stream the command uses.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output path (report file, or corpus prefix for `generate`, or
    /// directory for `repro`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Default directory for generated files when `--out` is not given.
    #[arg(long, global = true, env = "ZIPFKIT_OUT_DIR", hide_env_values = true)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus (die, grammar or markov).
    #[command(subcommand)]
    Generate(GenerateKind),
    /// Fit the rank-frequency exponent and entropy of one input.
    Analyze(AnalyzeArgs),
    /// Test whether two groups of inputs share one exponent.
    Compare(CompareArgs),
    /// Entropy of a truncated power law, from the exponent alone.
    ZipfEntropy(ZipfEntropyArgs),
    /// Synthetic end-to-end run: generate, analyze, compare, report.
    Repro(ReproArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// i.i.d. rolls of an M-sided die with P(i) ∝ i^-xi.
    Die(DieArgs),
    /// Sentences from the factorial-tree grammar with 1/j word marginals.
    Grammar(GrammarArgs),
    /// Sentences from a first-order Markov chain.
    Markov(MarkovArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DieArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub xi: f64,
    #[arg(long)]
    pub tokens: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GrammarArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub sentences: usize,
    /// Also write the exact sentence distribution (M <= 8).
    #[arg(long)]
    pub enumerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Uniform,
    Identity,
    Cycle,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MarkovArgs {
    #[arg(long, required_unless_present = "spec")]
    pub m: Option<usize>,
    #[arg(long)]
    pub sentences: usize,
    #[arg(long, default_value_t = 0.1)]
    pub end_prob: f64,
    #[arg(long, value_enum, default_value_t = Topology::Uniform)]
    pub topology: Topology,
    /// JSON file with `transition`, `initial`, `sentence_end_prob`.
    #[arg(long, conflicts_with_all = ["m", "topology", "end_prob"])]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// FASTA if the first non-blank character is '>', text otherwise.
    Auto,
    Text,
    Fasta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerArg {
    Words,
    Nmer,
    Delimiter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowArg {
    Sliding,
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvalidBaseArg {
    Error,
    Skip,
    Break,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TokenizerArgs {
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
    /// Defaults to `nmer` for FASTA input and `words` for text.
    #[arg(long, value_enum)]
    pub tokenizer: Option<TokenizerArg>,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = WindowArg::Sliding)]
    pub window: WindowArg,
    #[arg(long, default_value_t = 'e')]
    pub delimiter: char,
    #[arg(long)]
    pub lowercase: bool,
    #[arg(long)]
    pub strip_punctuation: bool,
    #[arg(long, value_enum, default_value_t = InvalidBaseArg::Break)]
    pub invalid_base: InvalidBaseArg,
}

impl TokenizerArgs {
    pub fn config(&self, fasta: bool) -> TokenizerConfig {
        let mode = match self.tokenizer {
            Some(TokenizerArg::Words) => Mode::Words,
            Some(TokenizerArg::Nmer) => Mode::Nmer,
            Some(TokenizerArg::Delimiter) => Mode::Delimiter,
            None if fasta => Mode::Nmer,
            None => Mode::Words,
        };
        TokenizerConfig {
            mode,
            n: self.n,
            window: match self.window {
                WindowArg::Sliding => Window::Sliding,
                WindowArg::Disjoint => Window::Disjoint,
            },
            delimiter: self.delimiter,
            lowercase: self.lowercase,
            strip_punctuation: self.strip_punctuation,
            invalid_base: match self.invalid_base {
                InvalidBaseArg::Error => InvalidBasePolicy::Error,
                InvalidBaseArg::Skip => InvalidBasePolicy::SkipCharacter,
                InvalidBaseArg::Break => InvalidBasePolicy::BreakSequence,
            },
        }
    }
}

impl Default for TokenizerArgs {
    fn default() -> Self {
        Self {
            input_format: InputFormat::Auto,
            tokenizer: None,
            n: 6,
            window: WindowArg::Sliding,
            delimiter: 'e',
            lowercase: false,
            strip_punctuation: false,
            invalid_base: InvalidBaseArg::Break,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[arg(long, default_value_t = 1)]
    pub rank_lo: usize,
    /// Last rank in the fit window (default: all ranks).
    #[arg(long)]
    pub rank_hi: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
}

impl FitArgs {
    pub fn params(&self) -> FitParams {
        FitParams {
            rank_lo: self.rank_lo,
            rank_hi: self.rank_hi,
            min_count: self.min_count,
        }
    }
}

impl Default for FitArgs {
    fn default() -> Self {
        Self {
            rank_lo: 1,
            rank_hi: None,
            min_count: 1,
        }
    }
}

/// Bootstrap resampling unit: `auto`, `sentence`, or a block length in tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockArg {
    Auto,
    Sentence,
    Tokens(usize),
}

impl std::str::FromStr for BlockArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(BlockArg::Auto),
            "sentence" => Ok(BlockArg::Sentence),
            n => n
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .map(BlockArg::Tokens)
                .ok_or_else(|| format!("expected `auto`, `sentence` or a positive block length, got {n:?}")),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub tokenizer: TokenizerArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Also write `ln_rank,ln_freq` for plotting.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Also write the rank table as CSV.
    #[arg(long)]
    pub ranks: Option<PathBuf>,
    /// Bootstrap replicates for a standard error on xi (0 = skip).
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long, default_value = "auto")]
    pub block: BlockArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestArg {
    Welch,
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareMode {
    /// Each file contributes one fitted exponent.
    PerFile,
    /// Files are pooled per group and each pool is bootstrapped.
    Pooled,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub group_a: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    pub group_b: Vec<PathBuf>,
    #[arg(long, default_value = "a")]
    pub label_a: String,
    #[arg(long, default_value = "b")]
    pub label_b: String,
    #[command(flatten)]
    pub tokenizer: TokenizerArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long, value_enum, default_value_t = TestArg::Welch)]
    pub test: TestArg,
    #[arg(long, value_enum, default_value_t = CompareMode::PerFile)]
    pub mode: CompareMode,
    /// Permutation resamples.
    #[arg(long, default_value_t = 9999)]
    pub resamples: usize,
    /// Bootstrap replicates per pooled group.
    #[arg(long = "bootstrap", default_value_t = 200)]
    pub b: usize,
    #[arg(long, default_value = "auto")]
    pub block: BlockArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ZipfEntropyArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproArgs {
    /// Corpora per exponent.
    #[arg(long, default_value_t = 10)]
    pub corpora: usize,
    #[arg(long, default_value_t = 100_000)]
    pub tokens: usize,
    #[arg(long, default_value_t = 4096)]
    pub m: usize,
    /// Bootstrap replicates for the per-category standard errors.
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 9999)]
    pub resamples: usize,
    /// Sentences sampled from the M = 4 grammar.
    #[arg(long, default_value_t = 100_000)]
    pub grammar_sentences: usize,
}
