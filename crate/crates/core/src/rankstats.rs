//! Rank-frequency fits and entropy.
//!
//! The fit is ordinary least squares of `ln(count/total)` on `ln(rank)`;
//! `xi` is the negated slope. Entropies are reported in bits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::RankTable;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fit window: ranks `rank_lo..=rank_hi` (all ranks when `rank_hi` is
/// `None`), dropping entries with fewer than `min_count` occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitParams {
    pub rank_lo: usize,
    pub rank_hi: Option<usize>,
    pub min_count: u64,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            rank_lo: 1,
            rank_hi: None,
            min_count: 1,
        }
    }
}

impl FitParams {
    pub fn window(rank_lo: usize, rank_hi: usize) -> Self {
        Self {
            rank_lo,
            rank_hi: Some(rank_hi),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct ZipfFit<F> {
    pub xi: F,
    #[serde(rename = "K")]
    pub k: F,
    pub se_xi: F,
    pub r_squared: F,
    pub n_points: usize,
    pub rank_lo: usize,
    pub rank_hi: usize,
    pub min_count: u64,
}

/// Least-squares line through `(ln rank, ln freq)` for real-valued
/// frequencies. Ranks must be positive and frequencies strictly positive.
pub fn fit_frequencies<F: Real>(points: &[(usize, F)]) -> Result<ZipfFit<F>> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} point(s) in fit window, need at least 2",
            points.len()
        )));
    }
    if points.iter().any(|&(r, f)| r == 0 || !f.is_finite() || f <= F::zero()) {
        return Err(Error::InvalidSpec("fit needs positive ranks and frequencies".into()));
    }
    let n = F::of_usize(points.len());
    let xs: Vec<F> = points.iter().map(|&(r, _)| F::of_usize(r).ln()).collect();
    let ys: Vec<F> = points.iter().map(|&(_, f)| f.ln()).collect();
    let mean_x = xs.iter().copied().sum::<F>() / n;
    let mean_y = ys.iter().copied().sum::<F>() / n;
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    let mut syy = F::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx <= F::zero() {
        return Err(Error::InsufficientData("all fit points share one rank".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: F = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let dof = points.len() - 2;
    let se = if dof == 0 {
        F::zero()
    } else {
        (sse / F::of_usize(dof) / sxx).sqrt()
    };
    let r_squared = if syy > F::zero() {
        (F::one() - sse / syy).max(F::zero()).min(F::one())
    } else {
        F::one()
    };
    Ok(ZipfFit {
        xi: -slope,
        k: intercept,
        se_xi: se,
        r_squared,
        n_points: points.len(),
        rank_lo: points[0].0,
        rank_hi: points[points.len() - 1].0,
        min_count: 1,
    })
}

/// Fits counts already sorted in descending order (rank `i+1` at index `i`).
pub fn fit_sorted_counts<F: Real>(counts: &[u64], total: u64, params: &FitParams) -> Result<ZipfFit<F>> {
    if total == 0 {
        return Err(Error::EmptyTable);
    }
    let lo = params.rank_lo.max(1);
    let hi = params.rank_hi.unwrap_or(counts.len()).min(counts.len());
    let total_f = F::of_u64(total);
    let points: Vec<(usize, F)> = (lo..=hi)
        .filter(|&r| counts[r - 1] >= params.min_count.max(1))
        .map(|r| (r, F::of_u64(counts[r - 1]) / total_f))
        .collect();
    let mut fit = fit_frequencies(&points)?;
    fit.rank_lo = lo;
    fit.rank_hi = hi;
    fit.min_count = params.min_count;
    Ok(fit)
}

pub fn fit_zipf<F: Real>(table: &RankTable, params: &FitParams) -> Result<ZipfFit<F>> {
    if table.entries.is_empty() {
        return Err(Error::EmptyTable);
    }
    let counts: Vec<u64> = table.counts().collect();
    fit_sorted_counts(&counts, table.total, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct EntropyReport<F> {
    pub entropy_bits: F,
    pub vocab: usize,
    pub max_entropy_bits: F,
    pub redundancy: F,
}

/// Entropy of the distribution proportional to `weights` (zeros ignored).
pub fn entropy_of_weights<F: Real>(weights: &[F]) -> Result<EntropyReport<F>> {
    let positive: Vec<F> = weights.iter().copied().filter(|&w| w > F::zero()).collect();
    if positive.is_empty() {
        return Err(Error::EmptyTable);
    }
    let total: F = positive.iter().copied().sum();
    let h: F = positive
        .iter()
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum();
    let h = h.max(F::zero());
    let vocab = positive.len();
    let max = F::of_usize(vocab).log2();
    let redundancy = if vocab == 1 {
        F::one()
    } else {
        (F::one() - h / max).max(F::zero())
    };
    Ok(EntropyReport {
        entropy_bits: h,
        vocab,
        max_entropy_bits: max,
        redundancy,
    })
}

pub fn shannon_entropy<F: Real>(table: &RankTable) -> Result<EntropyReport<F>> {
    if table.entries.is_empty() || table.total == 0 {
        return Err(Error::EmptyTable);
    }
    let weights: Vec<F> = table.counts().map(F::of_u64).collect();
    entropy_of_weights(&weights)
}

/// Entropy in bits of `p_r ∝ r^(-xi)` over ranks `1..=m`, in closed form:
/// `log2 Z + xi/(Z ln 2) Σ r^(-xi) ln r`.
pub fn zipf_entropy<F: Real>(xi: F, m: usize) -> Result<F> {
    if m == 0 {
        return Err(Error::InvalidSpec("vocabulary size must be >= 1".into()));
    }
    if !xi.is_finite() || xi < F::zero() {
        return Err(Error::InvalidSpec(format!("exponent {xi} must be finite and >= 0")));
    }
    let mut z = F::zero();
    let mut weighted_log = F::zero();
    for r in 1..=m {
        let ln_r = F::of_usize(r).ln();
        let w = (-xi * ln_r).exp();
        z = z + w;
        weighted_log = weighted_log + w * ln_r;
    }
    let h = z.log2() + xi * weighted_log / (z * F::LN_2());
    Ok(h.max(F::zero()))
}

/// Fit plus entropy, the JSON analysis schema. Fit fields are `null` when
/// the fit failed; `fit_error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct AnalysisReport<F> {
    pub xi: Option<F>,
    #[serde(rename = "K")]
    pub k: Option<F>,
    pub se_xi: Option<F>,
    pub r_squared: Option<F>,
    pub n_points: Option<usize>,
    pub rank_lo: usize,
    pub rank_hi: Option<usize>,
    pub min_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub entropy_bits: F,
    pub max_entropy_bits: F,
    pub redundancy: F,
    pub vocab: usize,
    pub total_tokens: u64,
    pub fit_log_base: String,
    pub entropy_unit: String,
}

impl<F: Real> AnalysisReport<F> {
    pub fn fit(&self) -> Option<ZipfFit<F>> {
        Some(ZipfFit {
            xi: self.xi?,
            k: self.k?,
            se_xi: self.se_xi?,
            r_squared: self.r_squared?,
            n_points: self.n_points?,
            rank_lo: self.rank_lo,
            rank_hi: self.rank_hi?,
            min_count: self.min_count,
        })
    }
}

/// Runs the fit and the entropy on one table. A failed fit is recorded in
/// `fit_error`; entropy is always reported.
pub fn analyze<F: Real>(table: &RankTable, params: &FitParams) -> Result<AnalysisReport<F>> {
    let entropy = shannon_entropy::<F>(table)?;
    let (fit, fit_error) = match fit_zipf::<F>(table, params) {
        Ok(fit) => (Some(fit), None),
        Err(e @ Error::InsufficientData(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(AnalysisReport {
        xi: fit.map(|f| f.xi),
        k: fit.map(|f| f.k),
        se_xi: fit.map(|f| f.se_xi),
        r_squared: fit.map(|f| f.r_squared),
        n_points: fit.map(|f| f.n_points),
        rank_lo: fit.map_or(params.rank_lo, |f| f.rank_lo),
        rank_hi: fit.map(|f| f.rank_hi).or(params.rank_hi),
        min_count: params.min_count,
        fit_error,
        entropy_bits: entropy.entropy_bits,
        max_entropy_bits: entropy.max_entropy_bits,
        redundancy: entropy.redundancy,
        vocab: table.vocab(),
        total_tokens: table.total,
        fit_log_base: "e".into(),
        entropy_unit: "bits".into(),
    })
}

/// Two-column `ln_rank,ln_freq` dump of the whole table.
pub fn plot_csv(table: &RankTable) -> String {
    let mut out = String::from("ln_rank,ln_freq\n");
    let total = table.total as f64;
    for e in &table.entries {
        writeln!(out, "{},{}", (e.rank as f64).ln(), (e.count as f64 / total).ln()).unwrap();
    }
    out
}
