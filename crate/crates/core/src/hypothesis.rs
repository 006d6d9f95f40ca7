//! Resampling and two-sample tests on fitted exponents.
//!
//! `bootstrap_xi` estimates the sampling spread of one corpus's exponent;
//! `welch_test` and `permutation_test` compare two groups of per-corpus
//! exponents under the null that both groups share one mean.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TokenId};
use crate::error::{Error, Result};
use crate::rankstats::{fit_sorted_counts, FitParams};
use crate::rng;
use crate::scalar::Real;
use crate::special::{normal_two_sided, student_t_two_sided};

pub const MIN_BOOTSTRAP_REPLICATES: usize = 100;
pub const MIN_PERMUTATION_RESAMPLES: usize = 999;
/// Default block length for unsegmented token streams.
pub const DEFAULT_BLOCK_TOKENS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Welch,
    Permutation,
    /// Difference of two bootstrapped point estimates over their pooled
    /// bootstrap standard error, referred to the normal distribution.
    BootstrapZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct GroupStats<F> {
    pub n: usize,
    pub mean: F,
    pub sd: F,
}

impl<F: Real> GroupStats<F> {
    pub fn of(xs: &[F]) -> Self {
        let n = xs.len();
        let mean = mean(xs);
        let sd = if n < 2 {
            F::zero()
        } else {
            let ss: F = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
            (ss / F::of_usize(n - 1)).sqrt()
        };
        Self { n, mean, sd }
    }
}

fn mean<F: Real>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::zero();
    }
    let first = xs[0];
    if xs.iter().all(|&x| x == first) {
        return first;
    }
    xs.iter().copied().sum::<F>() / F::of_usize(xs.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct TestReport<F> {
    pub method: Method,
    pub statistic: F,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<F>,
    pub p_value: F,
    pub group_a_stats: GroupStats<F>,
    pub group_b_stats: GroupStats<F>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resamples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Both groups have zero spread; the p-value is set by convention.
    #[serde(default)]
    pub degenerate: bool,
}

/// Welch's unequal-variance t test, two-sided.
pub fn welch_test<F: Real>(xs_a: &[F], xs_b: &[F]) -> Result<TestReport<F>> {
    if xs_a.len() < 2 || xs_b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Welch test needs two samples per group, got {} and {}",
            xs_a.len(),
            xs_b.len()
        )));
    }
    let a = GroupStats::of(xs_a);
    let b = GroupStats::of(xs_b);
    let va = a.sd * a.sd / F::of_usize(a.n);
    let vb = b.sd * b.sd / F::of_usize(b.n);
    let diff = a.mean - b.mean;
    let mut report = TestReport {
        method: Method::Welch,
        statistic: F::zero(),
        df: None,
        p_value: F::one(),
        group_a_stats: a,
        group_b_stats: b,
        resamples: None,
        seed: None,
        degenerate: false,
    };
    if va + vb == F::zero() {
        report.degenerate = true;
        if diff != F::zero() {
            report.statistic = F::infinity() * diff.signum();
            report.p_value = F::zero();
        }
        return Ok(report);
    }
    let t = diff / (va + vb).sqrt();
    let df = (va + vb) * (va + vb) / (va * va / F::of_usize(a.n - 1) + vb * vb / F::of_usize(b.n - 1));
    report.statistic = t;
    report.df = Some(df);
    report.p_value = student_t_two_sided(t, df);
    Ok(report)
}

/// Two-sided permutation test on `|mean_a - mean_b|`.
pub fn permutation_test<F: Real>(xs_a: &[F], xs_b: &[F], resamples: usize, seed: u64) -> Result<TestReport<F>> {
    if xs_a.is_empty() || xs_b.is_empty() || xs_a.len() + xs_b.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "permutation test needs at least 4 samples with both groups non-empty, got {} and {}",
            xs_a.len(),
            xs_b.len()
        )));
    }
    if resamples < MIN_PERMUTATION_RESAMPLES {
        return Err(Error::InvalidSpec(format!(
            "permutation test needs at least {MIN_PERMUTATION_RESAMPLES} resamples, got {resamples}"
        )));
    }
    let a = GroupStats::of(xs_a);
    let b = GroupStats::of(xs_b);
    let observed = (a.mean - b.mean).abs();
    // permuted statistics equal to the observed one up to rounding count as ties
    let threshold = observed - F::of(1e-12) * observed.max(F::one());
    let mut pool: Vec<F> = xs_a.iter().chain(xs_b).copied().collect();
    let na = xs_a.len();
    let mut rng = rng::seeded(seed);
    let mut extreme = 0usize;
    for _ in 0..resamples {
        pool.shuffle(&mut rng);
        let stat = (mean(&pool[..na]) - mean(&pool[na..])).abs();
        if stat >= threshold {
            extreme += 1;
        }
    }
    Ok(TestReport {
        method: Method::Permutation,
        statistic: observed,
        df: None,
        p_value: F::of_usize(1 + extreme) / F::of_usize(1 + resamples),
        group_a_stats: a,
        group_b_stats: b,
        resamples: Some(resamples),
        seed: Some(seed),
        degenerate: false,
    })
}

/// Resampling unit for the bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleUnit {
    Sentence,
    /// Contiguous runs of this many tokens over the flattened stream; the
    /// last block may be shorter.
    Block(usize),
}

impl ResampleUnit {
    /// Sentences when the corpus is segmented, fixed blocks otherwise.
    pub fn auto_for(corpus: &Corpus) -> Self {
        if corpus.sentences.len() >= 2 {
            ResampleUnit::Sentence
        } else {
            ResampleUnit::Block(DEFAULT_BLOCK_TOKENS)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct BootstrapReport<F> {
    pub xi_hat: F,
    pub se_boot: F,
    pub ci_lo: F,
    pub ci_hi: F,
    #[serde(rename = "B")]
    pub b: usize,
    pub discarded: usize,
    pub block: ResampleUnit,
    pub seed: u64,
    pub fit: FitParams,
}

fn units(corpus: &Corpus, unit: ResampleUnit) -> Result<Vec<Vec<TokenId>>> {
    match unit {
        ResampleUnit::Sentence => Ok(corpus.sentences.clone()),
        ResampleUnit::Block(0) => Err(Error::InvalidSpec("block length must be >= 1".into())),
        ResampleUnit::Block(len) => {
            let flat: Vec<TokenId> = corpus.tokens().collect();
            Ok(flat.chunks(len).map(<[TokenId]>::to_vec).collect())
        }
    }
}

fn sorted_counts(counts: &mut [u64]) -> u64 {
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.iter().sum()
}

/// Percentile with linear interpolation between order statistics.
fn percentile<F: Real>(sorted: &[F], q: f64) -> F {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = F::of(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Bootstraps the fitted exponent by resampling units with replacement.
/// Replicate `i` draws from substream `i` of `seed`, so parallel and serial
/// runs agree.
pub fn bootstrap_xi<F: Real>(
    corpus: &Corpus,
    params: &FitParams,
    replicates: usize,
    unit: ResampleUnit,
    seed: u64,
) -> Result<BootstrapReport<F>> {
    if replicates < MIN_BOOTSTRAP_REPLICATES {
        return Err(Error::InvalidSpec(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_REPLICATES} replicates, got {replicates}"
        )));
    }
    let units = units(corpus, unit)?;
    if units.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} resampling unit(s), need at least 2",
            units.len()
        )));
    }
    let vocab = corpus.intern.len();
    let mut full = corpus.counts();
    let total = sorted_counts(&mut full);
    let xi_hat = fit_sorted_counts::<F>(&full, total, params)?.xi;

    let fits: Vec<Result<F>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, i as u64);
            let mut counts = vec![0u64; vocab];
            for _ in 0..units.len() {
                for t in &units[rng.gen_range(0..units.len())] {
                    counts[t.index()] += 1;
                }
            }
            let total = sorted_counts(&mut counts);
            fit_sorted_counts::<F>(&counts, total, params).map(|f| f.xi)
        })
        .collect();

    let mut xis = Vec::with_capacity(replicates);
    let mut discarded = 0;
    for fit in fits {
        match fit {
            Ok(xi) => xis.push(xi),
            Err(Error::InsufficientData(_) | Error::EmptyTable) => discarded += 1,
            Err(e) => return Err(e),
        }
    }
    if discarded * 10 > replicates || xis.len() < 2 {
        return Err(Error::UnstableResample {
            discarded,
            total: replicates,
        });
    }
    let stats = GroupStats::of(&xis);
    xis.sort_by(|a, b| a.partial_cmp(b).expect("fitted exponents are finite"));
    Ok(BootstrapReport {
        xi_hat,
        se_boot: stats.sd,
        ci_lo: percentile(&xis, 0.025),
        ci_hi: percentile(&xis, 0.975),
        b: replicates,
        discarded,
        block: unit,
        seed,
        fit: *params,
    })
}

/// Compares two bootstrapped estimates: `z = (a - b) / sqrt(se_a² + se_b²)`.
pub fn bootstrap_z_test<F: Real>(a: &BootstrapReport<F>, b: &BootstrapReport<F>) -> TestReport<F> {
    let se = (a.se_boot * a.se_boot + b.se_boot * b.se_boot).sqrt();
    let diff = a.xi_hat - b.xi_hat;
    let group = |r: &BootstrapReport<F>| GroupStats {
        n: r.b - r.discarded,
        mean: r.xi_hat,
        sd: r.se_boot,
    };
    let (statistic, p_value, degenerate) = if se > F::zero() {
        let z = diff / se;
        (z, normal_two_sided(z), false)
    } else if diff == F::zero() {
        (F::zero(), F::one(), true)
    } else {
        (F::infinity() * diff.signum(), F::zero(), true)
    };
    TestReport {
        method: Method::BootstrapZ,
        statistic,
        df: None,
        p_value,
        group_a_stats: group(a),
        group_b_stats: group(b),
        resamples: Some(a.b),
        seed: Some(a.seed),
        degenerate,
    }
}
