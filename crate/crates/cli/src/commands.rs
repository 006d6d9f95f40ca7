use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use zipfkit::facgrammar::{approx, distribution_csv, enumerate_all, grammar_stream, word_marginals};
use zipfkit::hypothesis::bootstrap_z_test;
use zipfkit::rankstats::{analyze, plot_csv};
use zipfkit::{
    bootstrap_xi, build_grammar, build_rank_table, die_stream, make_die, markov_stream, permutation_test, welch_test,
    zipf_entropy, AnalysisReport, BootstrapReport, Corpus, CorpusMeta, Error, MarkovSpec, ResampleUnit, Result,
    TestReport,
};

use crate::args::{
    AnalyzeArgs, BlockArg, Cli, Command, CompareArgs, CompareMode, DieArgs, Format, GenerateKind, GrammarArgs,
    MarkovArgs, TestArg, Topology, ZipfEntropyArgs,
};
use crate::input::{load_input, pool, LoadedInput};
use crate::output::{emit, to_json, with_suffix, write_file, Provenance};
use crate::repro;

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(GenerateKind::Die(a)) => generate_die(&cli, a),
        Command::Generate(GenerateKind::Grammar(a)) => generate_grammar(&cli, a),
        Command::Generate(GenerateKind::Markov(a)) => generate_markov(&cli, a),
        Command::Analyze(a) => run_analyze(&cli, a),
        Command::Compare(a) => run_compare(&cli, a),
        Command::ZipfEntropy(a) => run_zipf_entropy(&cli, a),
        Command::Repro(a) => repro::run(&cli, a),
    }
}

fn display(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

fn prefix_for(cli: &Cli, kind: &str, m: usize) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        cli.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join(format!("{kind}-m{m}-s{}", cli.seed))
    })
}

/// Writes `<prefix>.txt` and `<prefix>.meta.json`; returns the file list.
fn write_corpus(prefix: &Path, corpus: &Corpus) -> Result<Vec<String>> {
    let txt = with_suffix(prefix, ".txt");
    let meta = with_suffix(prefix, ".meta.json");
    write_file(&txt, &corpus.to_text())?;
    write_file(&meta, &corpus.meta_json())?;
    Ok(vec![display(&txt), display(&meta)])
}

fn summary(prov: Provenance, corpus: &Corpus, files: Vec<String>) -> String {
    to_json(&json!({
        "provenance": prov,
        "sentences": corpus.sentences.len(),
        "tokens": corpus.token_count(),
        "vocab": corpus.intern.len(),
        "files": files,
    }))
}

fn generate_die(cli: &Cli, a: &DieArgs) -> Result<()> {
    let spec = make_die::<f64>(a.m, a.xi)?;
    let corpus = die_stream(&spec, a.tokens, cli.seed)?;
    let files = write_corpus(&prefix_for(cli, "die", a.m), &corpus)?;
    emit(
        None,
        &summary(Provenance::new("generate die", cli.seed, a), &corpus, files),
    )
}

fn generate_grammar(cli: &Cli, a: &GrammarArgs) -> Result<()> {
    let spec = build_grammar(a.m)?;
    let prefix = prefix_for(cli, "grammar", a.m);
    let grammar_path = with_suffix(&prefix, ".grammar.json");
    write_file(&grammar_path, &spec.to_json())?;
    let mut files = vec![display(&grammar_path)];
    let mut out = json!({
        "provenance": Provenance::new("generate grammar", cli.seed, a),
        "m": a.m,
    });
    if a.enumerate {
        let dist = enumerate_all(&spec)?;
        let csv = with_suffix(&prefix, ".enum.csv");
        write_file(&csv, &distribution_csv(&dist))?;
        files.push(display(&csv));
        let marginals = word_marginals(a.m, &dist);
        out["sentence_types"] = json!(dist.len());
        out["marginals"] = marginals.iter().map(|p| json!(p.to_string())).collect();
        out["marginals_approx"] = marginals.iter().map(|p| json!(approx(p))).collect();
    }
    if a.sentences > 0 {
        let corpus = grammar_stream(&spec, a.sentences, cli.seed)?;
        files.extend(write_corpus(&prefix, &corpus)?);
        out["sentences"] = json!(corpus.sentences.len());
        out["tokens"] = json!(corpus.token_count());
        out["vocab"] = json!(corpus.intern.len());
    } else if !a.enumerate {
        return Err(Error::EmptyRequest);
    }
    out["files"] = json!(files);
    emit(None, &to_json(&out))
}

#[derive(Deserialize)]
struct MarkovFile {
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    sentence_end_prob: f64,
}

fn generate_markov(cli: &Cli, a: &MarkovArgs) -> Result<()> {
    let spec: MarkovSpec = match (&a.spec, a.m) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let f: MarkovFile =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", display(path))))?;
            MarkovSpec::new(f.transition, f.initial, f.sentence_end_prob)?
        }
        (None, Some(m)) => match a.topology {
            Topology::Uniform => MarkovSpec::uniform(m, a.end_prob)?,
            Topology::Identity => MarkovSpec::identity(m, a.end_prob)?,
            Topology::Cycle => MarkovSpec::cycle(m, a.end_prob)?,
        },
        (None, None) => return Err(Error::InvalidSpec("markov needs --m or --spec".into())),
    };
    let corpus = markov_stream(&spec, a.sentences, cli.seed)?;
    let files = write_corpus(&prefix_for(cli, "markov", spec.m), &corpus)?;
    emit(
        None,
        &summary(Provenance::new("generate markov", cli.seed, a), &corpus, files),
    )
}

pub(crate) fn resample_unit(block: BlockArg, corpus: &Corpus) -> ResampleUnit {
    match block {
        BlockArg::Auto => ResampleUnit::auto_for(corpus),
        BlockArg::Sentence => ResampleUnit::Sentence,
        BlockArg::Tokens(n) => ResampleUnit::Block(n),
    }
}

#[derive(Serialize)]
struct AnalyzeOutput {
    provenance: Provenance,
    #[serde(flatten)]
    report: AnalysisReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<BootstrapReport>,
}

fn run_analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<()> {
    let input = load_input(&a.input, &display(&a.input), &a.tokenizer)?;
    let table = build_rank_table(&input.corpus)?;
    let params = a.fit.params();
    let report = analyze::<f64>(&table, &params)?;
    if let Some(p) = &a.plot {
        write_file(p, &plot_csv(&table))?;
    }
    if let Some(p) = &a.ranks {
        write_file(p, &table.to_csv())?;
    }
    let bootstrap = if a.bootstrap > 0 && report.fit_error.is_none() {
        let unit = resample_unit(a.block, &input.corpus);
        Some(bootstrap_xi(&input.corpus, &params, a.bootstrap, unit, cli.seed)?)
    } else {
        None
    };
    let fit_error = report.fit_error.clone();
    let mut provenance = Provenance::new("analyze", cli.seed, a);
    provenance.config["tokenizer_resolved"] = serde_json::to_value(&input.tokenizer).expect("serializes");
    provenance.inputs.push(input.digest);
    let body = match cli.format {
        Format::Json => to_json(&AnalyzeOutput {
            provenance,
            report,
            bootstrap,
        }),
        Format::Csv => table.to_csv(),
    };
    emit(cli.out.as_deref(), &body)?;
    match fit_error {
        Some(msg) => Err(Error::InsufficientData(msg)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct FileFit {
    group: String,
    path: String,
    xi: f64,
    se_xi: f64,
    r_squared: f64,
    vocab: usize,
    total_tokens: u64,
}

fn load_group(paths: &[PathBuf], a: &CompareArgs) -> Result<Vec<LoadedInput>> {
    paths.iter().map(|p| load_input(p, &display(p), &a.tokenizer)).collect()
}

fn run_compare(cli: &Cli, a: &CompareArgs) -> Result<()> {
    let group_a = load_group(&a.group_a, a)?;
    let group_b = load_group(&a.group_b, a)?;
    let tokenizer = group_a[0].tokenizer.clone();
    if let Some(odd) = group_a.iter().chain(&group_b).find(|i| i.tokenizer != tokenizer) {
        return Err(Error::ConfigMismatch(format!(
            "{} resolves to a different tokenizer than {}",
            odd.digest.path, group_a[0].digest.path
        )));
    }
    let params = a.fit.params();
    let mut provenance = Provenance::new("compare", cli.seed, a);
    provenance.config["tokenizer_resolved"] = serde_json::to_value(&tokenizer).expect("serializes");
    provenance.inputs = group_a.iter().chain(&group_b).map(|i| i.digest.clone()).collect();

    let mut out = json!({
        "label_a": a.label_a,
        "label_b": a.label_b,
        "mode": a.mode,
    });
    let test: TestReport = match a.mode {
        CompareMode::PerFile => {
            let mut fits = Vec::new();
            let mut xs = [Vec::new(), Vec::new()];
            for (g, (label, group)) in [(&a.label_a, &group_a), (&a.label_b, &group_b)].into_iter().enumerate() {
                for input in group {
                    let table = build_rank_table(&input.corpus)?;
                    let fit = zipfkit::fit_zipf::<f64>(&table, &params)?;
                    xs[g].push(fit.xi);
                    fits.push(FileFit {
                        group: label.clone(),
                        path: input.digest.path.clone(),
                        xi: fit.xi,
                        se_xi: fit.se_xi,
                        r_squared: fit.r_squared,
                        vocab: table.vocab(),
                        total_tokens: table.total,
                    });
                }
            }
            out["files"] = json!(fits);
            match a.test {
                TestArg::Welch => welch_test(&xs[0], &xs[1])?,
                TestArg::Permutation => permutation_test(&xs[0], &xs[1], a.resamples, cli.seed)?,
            }
        }
        CompareMode::Pooled => {
            let boot = |group: &[LoadedInput], label: &str, seed: u64| -> Result<BootstrapReport> {
                let pooled = pool(group.iter().map(|i| &i.corpus), CorpusMeta::new(label))?;
                bootstrap_xi(&pooled, &params, a.b, resample_unit(a.block, &pooled), seed)
            };
            let ba = boot(&group_a, &a.label_a, cli.seed)?;
            let bb = boot(&group_b, &a.label_b, cli.seed.wrapping_add(1))?;
            let test = bootstrap_z_test(&ba, &bb);
            out["bootstrap_a"] = json!(ba);
            out["bootstrap_b"] = json!(bb);
            test
        }
    };
    out["test"] = json!(test);
    out["provenance"] = json!(provenance);
    emit(cli.out.as_deref(), &to_json(&out))
}

fn run_zipf_entropy(cli: &Cli, a: &ZipfEntropyArgs) -> Result<()> {
    let h = zipf_entropy::<f64>(a.xi, a.m)?;
    let max = (a.m as f64).log2();
    let redundancy = if a.m == 1 { 1.0 } else { 1.0 - h / max };
    let out: Value = json!({
        "provenance": Provenance::new("zipf-entropy", cli.seed, a),
        "xi": a.xi,
        "m": a.m,
        "entropy_bits": h,
        "max_entropy_bits": max,
        "redundancy": redundancy,
    });
    emit(cli.out.as_deref(), &to_json(&out))
}
