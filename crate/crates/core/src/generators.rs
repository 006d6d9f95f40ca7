//! Token-stream generators: the power-law die and a first-order Markov
//! chain used as a control process.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusMeta, TokenId};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// Surface of word `j` (1-based).
pub fn word_surface(j: usize) -> String {
    format!("w{j}")
}

/// An M-sided die with `P(i) ∝ i^(-xi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct DieSpec<F> {
    pub m: usize,
    pub xi: F,
    pub probs: Vec<F>,
    pub cumulative: Vec<F>,
}

pub fn make_die<F: Real>(m: usize, xi: F) -> Result<DieSpec<F>> {
    if m == 0 {
        return Err(Error::InvalidSpec("die needs at least one side".into()));
    }
    if !xi.is_finite() || xi < F::zero() {
        return Err(Error::InvalidSpec(format!("exponent {xi} must be finite and >= 0")));
    }
    let weights: Vec<F> = (1..=m).map(|i| F::of_usize(i).powf(-xi)).collect();
    if weights.iter().any(|&w| w <= F::zero()) {
        return Err(Error::InvalidSpec(format!(
            "exponent {xi} underflows side probabilities at m = {m}"
        )));
    }
    let norm: F = weights.iter().copied().sum();
    let probs: Vec<F> = weights.into_iter().map(|w| w / norm).collect();
    let cumulative = probs
        .iter()
        .scan(F::zero(), |acc, &p| {
            *acc = *acc + p;
            Some(*acc)
        })
        .collect();
    Ok(DieSpec {
        m,
        xi,
        probs,
        cumulative,
    })
}

impl<F: Real> DieSpec<F> {
    /// Inverse-CDF lookup of a uniform draw in `[0, 1)`; returns a 0-based side.
    pub fn side_for(&self, u: F) -> usize {
        self.cumulative.partition_point(|&c| c <= u).min(self.m - 1)
    }

    pub fn roll<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.side_for(F::of(rng.gen::<f64>()))
    }
}

/// `n_tokens` i.i.d. die rolls as a single-sentence corpus over `w1..wM`.
pub fn die_stream<F: Real>(spec: &DieSpec<F>, n_tokens: usize, seed: u64) -> Result<Corpus> {
    if n_tokens == 0 {
        return Err(Error::EmptyRequest);
    }
    let mut rng = rng::seeded(seed);
    let mut corpus = Corpus::new(CorpusMeta {
        source: "die".into(),
        generator: Some(serde_json::json!({
            "kind": "die",
            "m": spec.m,
            "xi": spec.xi,
            "probs": spec.probs,
        })),
        seed: Some(seed),
        ..CorpusMeta::default()
    });
    let mut ids: Vec<Option<TokenId>> = vec![None; spec.m];
    let mut sentence = Vec::with_capacity(n_tokens);
    for _ in 0..n_tokens {
        let side = spec.roll(&mut rng);
        let id = match ids[side] {
            Some(id) => id,
            None => {
                let id = corpus.intern.intern(&word_surface(side + 1))?;
                ids[side] = Some(id);
                id
            }
        };
        sentence.push(id);
    }
    corpus.sentences.push(sentence);
    Ok(corpus)
}

/// First-order Markov chain over words `w1..wM` with geometric sentence
/// lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct MarkovSpec<F> {
    pub m: usize,
    pub transition: Vec<Vec<F>>,
    pub initial: Vec<F>,
    pub sentence_end_prob: F,
}

impl<F: Real> MarkovSpec<F> {
    pub fn new(transition: Vec<Vec<F>>, initial: Vec<F>, sentence_end_prob: F) -> Result<Self> {
        let spec = Self {
            m: initial.len(),
            transition,
            initial,
            sentence_end_prob,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Every state equally likely at every step.
    pub fn uniform(m: usize, sentence_end_prob: F) -> Result<Self> {
        let p = F::one() / F::of_usize(m.max(1));
        Self::new(vec![vec![p; m]; m], vec![p; m], sentence_end_prob)
    }

    /// Absorbing chain: each sentence repeats its first word.
    pub fn identity(m: usize, sentence_end_prob: F) -> Result<Self> {
        let transition = (0..m)
            .map(|i| (0..m).map(|j| if i == j { F::one() } else { F::zero() }).collect())
            .collect();
        let p = F::one() / F::of_usize(m.max(1));
        Self::new(transition, vec![p; m], sentence_end_prob)
    }

    /// Deterministic cycle `w1 -> w2 -> ... -> wM -> w1`, starting at `w1`.
    pub fn cycle(m: usize, sentence_end_prob: F) -> Result<Self> {
        let transition = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if j == (i + 1) % m { F::one() } else { F::zero() })
                    .collect()
            })
            .collect();
        let initial = (0..m).map(|j| if j == 0 { F::one() } else { F::zero() }).collect();
        Self::new(transition, initial, sentence_end_prob)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidSpec("markov chain needs at least one state".into()));
        }
        let p = self.sentence_end_prob;
        if !(p > F::zero() && p < F::one()) {
            return Err(Error::InvalidSpec(format!("sentence_end_prob {p} outside (0, 1)")));
        }
        check_stochastic("initial", &self.initial, self.m)?;
        if self.transition.len() != self.m {
            return Err(Error::InvalidSpec(format!(
                "transition has {} rows, expected {}",
                self.transition.len(),
                self.m
            )));
        }
        for (i, row) in self.transition.iter().enumerate() {
            check_stochastic(&format!("transition row {i}"), row, self.m)?;
        }
        Ok(())
    }
}

fn check_stochastic<F: Real>(what: &str, row: &[F], m: usize) -> Result<()> {
    if row.len() != m {
        return Err(Error::InvalidSpec(format!(
            "{what} has length {}, expected {m}",
            row.len()
        )));
    }
    if row.iter().any(|&p| !p.is_finite() || p < F::zero()) {
        return Err(Error::InvalidSpec(format!("{what} has a negative or non-finite entry")));
    }
    let sum: F = row.iter().copied().sum();
    if (sum - F::one()).abs() > F::tol(1e-12) {
        return Err(Error::InvalidSpec(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

fn cumulative<F: Real>(row: &[F]) -> Vec<F> {
    row.iter()
        .scan(F::zero(), |acc, &p| {
            *acc = *acc + p;
            Some(*acc)
        })
        .collect()
}

fn draw<F: Real, R: Rng + ?Sized>(cum: &[F], rng: &mut R) -> usize {
    let u = F::of(rng.gen::<f64>());
    let idx = cum.partition_point(|&c| c <= u);
    if idx < cum.len() {
        return idx;
    }
    // u landed above a row total that rounded below 1: take the last state
    // with positive mass
    let total = cum[cum.len() - 1];
    cum.partition_point(|&c| c < total)
}

/// Samples `n_sentences` sentences: start from `initial`, emit, stop with
/// probability `sentence_end_prob`, otherwise transition and repeat.
pub fn markov_stream<F: Real>(spec: &MarkovSpec<F>, n_sentences: usize, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    if n_sentences == 0 {
        return Err(Error::EmptyRequest);
    }
    let init = cumulative(&spec.initial);
    let rows: Vec<Vec<F>> = spec.transition.iter().map(|r| cumulative(r)).collect();
    let mut rng = rng::seeded(seed);
    let mut corpus = Corpus::new(CorpusMeta {
        source: "markov".into(),
        generator: Some(serde_json::json!({ "kind": "markov", "spec": spec })),
        seed: Some(seed),
        ..CorpusMeta::default()
    });
    let mut ids: Vec<Option<TokenId>> = vec![None; spec.m];
    let end = spec.sentence_end_prob.to_f64().unwrap_or(0.5);
    for _ in 0..n_sentences {
        let mut state = draw(&init, &mut rng);
        let mut sentence = Vec::new();
        loop {
            let id = match ids[state] {
                Some(id) => id,
                None => {
                    let id = corpus.intern.intern(&word_surface(state + 1))?;
                    ids[state] = Some(id);
                    id
                }
            };
            sentence.push(id);
            if rng.gen::<f64>() < end {
                break;
            }
            state = draw(&rows[state], &mut rng);
        }
        corpus.sentences.push(sentence);
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_rank_table;
    use crate::special::chi_square_sf;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    /// Exact die probabilities with rational arithmetic (xi = 1 only).
    fn harmonic_die(m: usize) -> Vec<BigRational> {
        let h: BigRational = (1..=m)
            .map(|j| BigRational::new(BigInt::from(1), BigInt::from(j)))
            .sum();
        (1..=m)
            .map(|i| BigRational::new(BigInt::from(1), BigInt::from(i)) / &h)
            .collect()
    }

    #[test]
    fn four_sided_die_matches_exact_rationals() {
        let exact = harmonic_die(4);
        let want = [(12, 25), (6, 25), (4, 25), (3, 25)];
        for (e, (n, d)) in exact.iter().zip(want) {
            assert_eq!(*e, BigRational::new(BigInt::from(n), BigInt::from(d)));
        }
        let die = make_die(4, 1.0f64).unwrap();
        for (p, e) in die.probs.iter().zip(&exact) {
            assert!((p - e.to_f64().unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn trivial_dice() {
        assert_eq!(make_die(1, 1.0f64).unwrap().probs, vec![1.0]);
        let uniform = make_die(4, 0.0f64).unwrap();
        assert!(uniform.probs.iter().all(|&p| p == 0.25));
        assert!(make_die(0, 1.0f64).is_err());
        assert!(make_die(3, -0.1f64).is_err());
        assert!(make_die(3, f64::NAN).is_err());
        assert!(make_die(3, f64::INFINITY).is_err());
    }

    #[test]
    fn die_invariants() {
        for &(m, xi) in &[(1usize, 1.0f64), (7, 0.286), (1000, 1.0), (4096, 0.57), (50, 2.5)] {
            let die = make_die(m, xi).unwrap();
            let sum: f64 = die.probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for (i, p) in die.probs.iter().enumerate() {
                let want = ((i + 1) as f64).powf(-xi);
                assert!(((p / die.probs[0]) - want).abs() <= 1e-12 * want);
            }
            assert!(die.cumulative.windows(2).all(|w| w[0] < w[1]));
            assert!((die.cumulative[m - 1] - 1.0).abs() < 1e-12);
            if xi > 0.0 {
                assert!(die.probs.windows(2).all(|w| w[0] > w[1]));
            }
        }
    }

    #[test]
    fn single_sided_die_stream() {
        let c = die_stream(&make_die(1, 1.0f64).unwrap(), 5, 123).unwrap();
        assert_eq!(c.to_text(), "w1 w1 w1 w1 w1\n");
        assert!(matches!(
            die_stream(&make_die(1, 1.0f64).unwrap(), 0, 1),
            Err(Error::EmptyRequest)
        ));
    }

    #[test]
    fn die_stream_is_deterministic() {
        let die = make_die(50, 1.0f64).unwrap();
        let a = die_stream(&die, 10_000, 7).unwrap();
        let b = die_stream(&die, 10_000, 7).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.meta_json(), b.meta_json());
        let c = die_stream(&die, 10_000, 8).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn die_stream_top_frequencies_within_binomial_error() {
        let die = make_die(1000, 1.0f64).unwrap();
        let n = 1_000_000usize;
        let c = die_stream(&die, n, 42).unwrap();
        let counts = c.counts();
        for i in 0..100 {
            let id = c.intern.lookup(&word_surface(i + 1)).unwrap();
            let p = die.probs[i];
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let f = counts[id.index()] as f64 / n as f64;
            assert!((f - p).abs() < 3.0 * se, "side {}: {f} vs {p} (se {se})", i + 1);
        }
    }

    #[test]
    fn die_stream_chi_square_goodness_of_fit() {
        for &(m, xi, seed) in &[(10usize, 1.0f64, 1u64), (1000, 1.0, 2), (300, 0.57, 3)] {
            let die = make_die(m, xi).unwrap();
            let n = 1_000_000usize;
            let c = die_stream(&die, n, seed).unwrap();
            let counts = c.counts();
            let mut stat = 0.0;
            for (i, p) in die.probs.iter().enumerate() {
                let observed = c.intern.lookup(&word_surface(i + 1)).map_or(0, |id| counts[id.index()]) as f64;
                let expected = p * n as f64;
                stat += (observed - expected).powi(2) / expected;
            }
            let pval = chi_square_sf(stat, (m - 1) as f64);
            assert!(pval > 0.001, "m={m} xi={xi}: chi2 {stat}, p {pval}");
        }
    }

    #[test]
    fn single_state_chain_geometric_lengths() {
        let spec = MarkovSpec::new(vec![vec![1.0f64]], vec![1.0], 0.25).unwrap();
        let c = markov_stream(&spec, 20_000, 5).unwrap();
        assert_eq!(c.intern.len(), 1);
        let mean = c.token_count() as f64 / 20_000.0;
        // geometric on {1, 2, ...}: mean 1/p = 4, sd sqrt(1-p)/p ≈ 3.46
        assert!((mean - 4.0).abs() < 4.0 * 3.47 / (20_000f64).sqrt());
    }

    #[test]
    fn identity_chain_repeats_one_word() {
        let spec = MarkovSpec::identity(4, 0.2f64).unwrap();
        let c = markov_stream(&spec, 40_000, 11).unwrap();
        for s in &c.sentences {
            assert!(s.iter().all(|&t| t == s[0]));
        }
        let table = build_rank_table(&c).unwrap();
        for e in &table.entries {
            let share = e.count as f64 / table.total as f64;
            assert!((share - 0.25).abs() < 0.02, "{} share {share}", e.surface);
        }
    }

    #[test]
    fn cycle_chain_alternates() {
        let spec = MarkovSpec::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0], 0.3f64).unwrap();
        assert_eq!(spec, MarkovSpec::cycle(2, 0.3).unwrap());
        let c = markov_stream(&spec, 500, 3).unwrap();
        for i in 0..c.sentences.len() {
            for (k, w) in c.sentence_surfaces(i).iter().enumerate() {
                assert_eq!(*w, if k % 2 == 0 { "w1" } else { "w2" });
            }
        }
    }

    #[test]
    fn invalid_markov_specs() {
        assert!(MarkovSpec::new(vec![vec![0.5f64, 0.4], vec![0.5, 0.5]], vec![1.0, 0.0], 0.1).is_err());
        assert!(MarkovSpec::new(vec![vec![1.5f64, -0.5], vec![0.5, 0.5]], vec![1.0, 0.0], 0.1).is_err());
        assert!(MarkovSpec::new(vec![vec![1.0f64]], vec![0.9], 0.1).is_err());
        assert!(MarkovSpec::new(vec![vec![1.0f64]], vec![1.0], 0.0).is_err());
        assert!(MarkovSpec::new(vec![vec![1.0f64]], vec![1.0], 1.0).is_err());
        assert!(MarkovSpec::<f64>::new(vec![], vec![], 0.5).is_err());
    }

    #[test]
    fn markov_is_deterministic_and_json_round_trips() {
        let spec = MarkovSpec::uniform(5, 0.1f64).unwrap();
        let a = markov_stream(&spec, 200, 99).unwrap();
        let b = markov_stream(&spec, 200, 99).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let json = serde_json::to_string(&spec).unwrap();
        let back: MarkovSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn generic_over_single_precision() {
        let die = make_die(4, 1.0f32).unwrap();
        assert!((die.probs[0] - 0.48).abs() < 1e-6);
        let c = die_stream(&die, 100, 1).unwrap();
        assert_eq!(c.token_count(), 100);
    }
}
