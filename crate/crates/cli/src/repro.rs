//! `zipfkit repro`: the synthetic end-to-end run. Every path it records is
//! relative to the output directory and nothing depends on the clock, so two
//! runs with the same arguments produce byte-identical trees.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::RngCore;
use serde::Serialize;
use zipfkit::facgrammar::{distribution_csv, enumerate_all, grammar_stream, word_marginals};
use zipfkit::generators::word_surface;
use zipfkit::hypothesis::GroupStats;
use zipfkit::rankstats::analyze;
use zipfkit::{
    bootstrap_xi, build_grammar, build_rank_table, die_stream, make_die, permutation_test, rng, welch_test,
    zipf_entropy, BootstrapReport, CorpusMeta, FitParams, Result, TestReport,
};

use crate::args::{Cli, ReproArgs};
use crate::input::pool;
use crate::output::{sha256_hex, to_json, write_file, Provenance};

pub const EXPONENTS: [f64; 3] = [0.286, 0.386, 0.57];
const GRAMMAR_M: usize = 4;
const BLOCK_TOKENS: usize = 1000;

#[derive(Serialize)]
struct CorpusRow {
    file: String,
    seed: u64,
    sha256: String,
    xi: f64,
    se_xi: f64,
    r_squared: f64,
    entropy_bits: f64,
    vocab: usize,
}

#[derive(Serialize)]
struct Category {
    label: String,
    xi_true: f64,
    corpora: Vec<CorpusRow>,
    xi_mean: f64,
    xi_sd: f64,
    entropy_mean: f64,
    entropy_closed_form: f64,
    bootstrap: BootstrapReport,
}

#[derive(Serialize)]
struct Comparison {
    a: String,
    b: String,
    welch: TestReport,
    permutation: TestReport,
}

#[derive(Serialize)]
struct GrammarSection {
    m: usize,
    distribution: String,
    corpus: String,
    sentences: usize,
    marginals_exact: Vec<String>,
    marginals_sampled: Vec<f64>,
}

#[derive(Serialize)]
struct Checks {
    entropy_decreases_with_xi: bool,
    closed_form_decreases_with_xi: bool,
    all_pairs_significant: bool,
    grammar_marginals_exact: bool,
}

#[derive(Serialize)]
struct Repro {
    provenance: Provenance,
    fit: FitParams,
    categories: Vec<Category>,
    comparisons: Vec<Comparison>,
    grammar: GrammarSection,
    checks: Checks,
}

fn label(xi: f64) -> String {
    format!("xi{xi}")
}

/// Seed for corpus `k` of category `c`, drawn from its own substream.
fn corpus_seed(base: u64, c: usize, k: usize, per: usize) -> u64 {
    rng::substream(base, (c * per + k) as u64).next_u64()
}

pub fn run(cli: &Cli, a: &ReproArgs) -> Result<()> {
    let root = cli
        .out
        .clone()
        .or_else(|| cli.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("repro"));
    let fit = FitParams::default();
    let mut categories = Vec::new();
    let mut pooled = Vec::new();
    for (c, &xi) in EXPONENTS.iter().enumerate() {
        let die = make_die::<f64>(a.m, xi)?;
        let mut rows = Vec::new();
        let mut corpora = Vec::new();
        for k in 0..a.corpora {
            let seed = corpus_seed(cli.seed, c, k, a.corpora);
            let corpus = die_stream(&die, a.tokens, seed)?;
            let rel = format!("corpora/{}-{k:03}.txt", label(xi));
            let text = corpus.to_text();
            write_file(&root.join(&rel), &text)?;
            let table = build_rank_table(&corpus)?;
            let report = analyze::<f64>(&table, &fit)?;
            let f = report.fit().ok_or_else(|| {
                zipfkit::Error::InsufficientData(format!("{rel}: {}", report.fit_error.clone().unwrap_or_default()))
            })?;
            rows.push(CorpusRow {
                file: rel,
                seed,
                sha256: sha256_hex(text.as_bytes()),
                xi: f.xi,
                se_xi: f.se_xi,
                r_squared: f.r_squared,
                entropy_bits: report.entropy_bits,
                vocab: report.vocab,
            });
            corpora.push(corpus);
        }
        let merged = pool(&corpora, CorpusMeta::new(label(xi)))?;
        let bootstrap = bootstrap_xi(
            &merged,
            &fit,
            a.bootstrap,
            zipfkit::ResampleUnit::Block(BLOCK_TOKENS),
            rng::substream(cli.seed, (EXPONENTS.len() * a.corpora + c) as u64).next_u64(),
        )?;
        let xis: Vec<f64> = rows.iter().map(|r| r.xi).collect();
        let hs: Vec<f64> = rows.iter().map(|r| r.entropy_bits).collect();
        let xs = GroupStats::of(&xis);
        categories.push(Category {
            label: label(xi),
            xi_true: xi,
            xi_mean: xs.mean,
            xi_sd: xs.sd,
            entropy_mean: GroupStats::of(&hs).mean,
            entropy_closed_form: zipf_entropy(xi, a.m)?,
            corpora: rows,
            bootstrap,
        });
        pooled.push(xis);
    }

    let mut comparisons = Vec::new();
    for i in 0..EXPONENTS.len() {
        for j in i + 1..EXPONENTS.len() {
            comparisons.push(Comparison {
                a: categories[i].label.clone(),
                b: categories[j].label.clone(),
                welch: welch_test(&pooled[i], &pooled[j])?,
                permutation: permutation_test(&pooled[i], &pooled[j], a.resamples, cli.seed)?,
            });
        }
    }

    let grammar = grammar_section(&root, cli.seed, a.grammar_sentences)?;
    let decreasing = |f: &dyn Fn(&Category) -> f64| categories.windows(2).all(|w| f(&w[0]) > f(&w[1]));
    let checks = Checks {
        entropy_decreases_with_xi: decreasing(&|c| c.entropy_mean),
        closed_form_decreases_with_xi: decreasing(&|c| c.entropy_closed_form),
        all_pairs_significant: comparisons.iter().all(|c| c.welch.p_value < 0.01),
        grammar_marginals_exact: grammar.marginals_exact.iter().enumerate().all(|(i, m)| {
            *m == if i == 0 {
                "1".to_string()
            } else {
                format!("1/{}", i + 1)
            }
        }),
    };
    let report = Repro {
        provenance: Provenance::new("repro", cli.seed, a),
        fit,
        categories,
        comparisons,
        grammar,
        checks,
    };
    write_file(&root.join("repro.json"), &to_json(&report))?;
    write_file(&root.join("repro.md"), &markdown(&report))?;
    print!("{}", to_json(&report.checks));
    Ok(())
}

fn grammar_section(root: &Path, seed: u64, sentences: usize) -> Result<GrammarSection> {
    let spec = build_grammar(GRAMMAR_M)?;
    let dist = enumerate_all(&spec)?;
    let distribution = format!("grammar/m{GRAMMAR_M}.enum.csv");
    write_file(&root.join(&distribution), &distribution_csv(&dist))?;
    let exact = word_marginals(GRAMMAR_M, &dist);
    let corpus_rel = format!("grammar/m{GRAMMAR_M}.txt");
    let corpus = grammar_stream(&spec, sentences, seed)?;
    write_file(&root.join(&corpus_rel), &corpus.to_text())?;
    let n = corpus.sentences.len() as f64;
    let sampled = (1..=GRAMMAR_M)
        .map(|w| {
            let id = corpus.intern.lookup(&word_surface(w));
            let hits = corpus
                .sentences
                .iter()
                .filter(|s| id.is_some_and(|id| s.contains(&id)))
                .count();
            hits as f64 / n
        })
        .collect();
    Ok(GrammarSection {
        m: GRAMMAR_M,
        distribution,
        corpus: corpus_rel,
        sentences,
        marginals_exact: exact.iter().map(ToString::to_string).collect(),
        marginals_sampled: sampled,
    })
}

fn markdown(r: &Repro) -> String {
    let mut s = String::from("# zipfkit repro\n\n");
    writeln!(
        s,
        "seed {}, fit ranks {}..all, min count {}\n",
        r.provenance.seed, r.fit.rank_lo, r.fit.min_count
    )
    .unwrap();
    s.push_str("| category | xi true | xi mean | xi sd | bootstrap se | 95% CI | H mean (bits) | H closed form |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    for c in &r.categories {
        writeln!(
            s,
            "| {} | {} | {:.4} | {:.4} | {:.4} | [{:.4}, {:.4}] | {:.4} | {:.4} |",
            c.label,
            c.xi_true,
            c.xi_mean,
            c.xi_sd,
            c.bootstrap.se_boot,
            c.bootstrap.ci_lo,
            c.bootstrap.ci_hi,
            c.entropy_mean,
            c.entropy_closed_form
        )
        .unwrap();
    }
    s.push_str("\n| a | b | Welch t | df | Welch p | permutation p |\n|---|---|---|---|---|---|\n");
    for c in &r.comparisons {
        writeln!(
            s,
            "| {} | {} | {:.3} | {:.2} | {:.3e} | {:.3e} |",
            c.a,
            c.b,
            c.welch.statistic,
            c.welch.df.unwrap_or(f64::NAN),
            c.welch.p_value,
            c.permutation.p_value
        )
        .unwrap();
    }
    writeln!(s, "\n## Grammar, M = {}\n", r.grammar.m).unwrap();
    s.push_str("| word | exact marginal | sampled |\n|---|---|---|\n");
    for (i, (e, x)) in r
        .grammar
        .marginals_exact
        .iter()
        .zip(&r.grammar.marginals_sampled)
        .enumerate()
    {
        writeln!(s, "| {} | {e} | {x:.4} |", word_surface(i + 1)).unwrap();
    }
    writeln!(s, "\n## Checks\n").unwrap();
    for (name, ok) in [
        ("entropy decreases with xi", r.checks.entropy_decreases_with_xi),
        (
            "closed-form entropy decreases with xi",
            r.checks.closed_form_decreases_with_xi,
        ),
        ("all pairs differ at p < 0.01", r.checks.all_pairs_significant),
        ("grammar marginals are 1/j", r.checks.grammar_marginals_exact),
    ] {
        writeln!(s, "- {name}: {}", if ok { "yes" } else { "no" }).unwrap();
    }
    s
}
