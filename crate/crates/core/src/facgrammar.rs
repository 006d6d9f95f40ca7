//! The factorial-tree grammar.
//!
//! A depth-M tree has M branches at level 1, M(M-1) at level 2 and so on;
//! its M! root-to-leaf paths spell every permutation of `w1..wM`. Replacing
//! branch labels by the empty string thins word occurrences: if word `j`
//! keeps its label on `a[i]` of the branches at level `i`, it appears on a
//! fraction `Σ a[i]·(M-i)!/M!` of all paths.
//!
//! The tree is never materialized. A path is a permutation; at level `i`
//! word `j` is emitted iff the lexicographic rank of the preceding prefix
//! among all prefixes that avoid `j` is below `a[j][i]`. All arithmetic is
//! exact (big integers and rationals).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusMeta};
use crate::error::{Error, Result};
use crate::generators::word_surface;
use crate::rng;

/// Largest M for which [`enumerate_all`] walks every path.
pub const ENUMERATION_CAP: usize = 8;

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Number of length-`len` sequences of distinct symbols drawn from `pool`
/// symbols: `pool! / (pool - len)!`.
pub fn falling(pool: usize, len: usize) -> BigUint {
    debug_assert!(len <= pool);
    ((pool - len + 1)..=pool).fold(BigUint::one(), |acc, k| acc * k)
}

/// Number of level-`level` branches carrying a given label:
/// `(M-1)!/(M-level)!`.
pub fn level_cap(m: usize, level: usize) -> BigUint {
    falling(m - 1, level - 1)
}

/// Targets `k_j = M!/j` that make word `j` appear in a `1/j` share of paths.
pub fn zipf_targets(m: usize) -> Result<Vec<BigUint>> {
    if m == 0 {
        return Err(Error::InvalidSpec("grammar needs at least one word".into()));
    }
    let total = factorial(m);
    Ok((1..=m).map(|j| &total / j).collect())
}

/// Greedy factorial-base allocation of `k` paths to levels 1..M, capped by
/// the number of branches available at each level.
pub fn allocate(m: usize, k: &BigUint) -> Result<Vec<BigUint>> {
    if m == 0 {
        return Err(Error::InvalidSpec("grammar needs at least one word".into()));
    }
    let total = factorial(m);
    if *k > total {
        return Err(Error::InvalidTarget {
            k: k.to_string(),
            max: total.to_string(),
        });
    }
    let mut remainder = k.clone();
    let mut alloc = Vec::with_capacity(m);
    for level in 1..=m {
        let paths_per_branch = factorial(m - level);
        let a = (&remainder / &paths_per_branch).min(level_cap(m, level));
        remainder -= &a * &paths_per_branch;
        alloc.push(a);
    }
    if !remainder.is_zero() {
        // cannot happen: level caps sum to M!
        return Err(Error::InvalidAllocation(format!("greedy left remainder {remainder}")));
    }
    Ok(alloc)
}

fn check_caps(m: usize, alloc: &[BigUint]) -> Result<()> {
    if alloc.len() != m {
        return Err(Error::InvalidAllocation(format!(
            "allocation has {} levels, expected {m}",
            alloc.len()
        )));
    }
    for (i, a) in alloc.iter().enumerate() {
        let cap = level_cap(m, i + 1);
        if *a > cap {
            return Err(Error::InvalidAllocation(format!(
                "level {} keeps {a} labels, cap is {cap}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Numerator `Σ a[i]·(M-i)!` of the path fraction over `M!`.
pub fn path_count(m: usize, alloc: &[BigUint]) -> Result<BigUint> {
    check_caps(m, alloc)?;
    Ok(alloc.iter().enumerate().map(|(i, a)| a * factorial(m - (i + 1))).sum())
}

/// Exact share of root-to-leaf paths emitting a word with allocation `alloc`.
pub fn path_fraction(m: usize, alloc: &[BigUint]) -> Result<BigRational> {
    let num = path_count(m, alloc)?;
    Ok(BigRational::new(num.into(), factorial(m).into()))
}

/// Word count, per-word allocation and per-word targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarSpec {
    pub m: usize,
    /// `alloc[j][i]`: retained labels of word `j+1` at level `i+1`.
    pub alloc: Vec<Vec<BigUint>>,
    pub targets: Vec<BigUint>,
}

impl GrammarSpec {
    /// Validates caps and recomputes targets from an explicit allocation.
    pub fn from_alloc(m: usize, alloc: Vec<Vec<BigUint>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidSpec("grammar needs at least one word".into()));
        }
        if alloc.len() != m {
            return Err(Error::InvalidAllocation(format!(
                "{} word allocations for {m} words",
                alloc.len()
            )));
        }
        let targets = alloc.iter().map(|a| path_count(m, a)).collect::<Result<Vec<_>>>()?;
        Ok(Self { m, alloc, targets })
    }

    /// Whether word `word` (1-based) keeps its label on the branch reached
    /// by `prefix` at level `prefix.len() + 1`.
    pub fn emits(&self, word: usize, prefix: &[usize]) -> Result<bool> {
        let a = &self.alloc[word - 1][prefix.len()];
        if a.is_zero() {
            return Ok(false);
        }
        if *a == level_cap(self.m, prefix.len() + 1) {
            return Ok(true);
        }
        Ok(prefix_rank(prefix, word, self.m)? < *a)
    }

    /// Words emitted along the path `perm` (1-based symbols).
    pub fn emitted_along(&self, perm: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, &word) in perm.iter().enumerate() {
            if self.emits(word, &perm[..i])? {
                out.push(word);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GrammarDoc::from(self)).expect("grammar serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GrammarDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let parse = |s: &String| s.parse::<BigUint>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        let alloc = doc
            .alloc
            .iter()
            .map(|row| row.iter().map(parse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let spec = Self::from_alloc(doc.m, alloc)?;
        let targets = doc.targets.iter().map(parse).collect::<Result<Vec<_>>>()?;
        if targets != spec.targets {
            return Err(Error::InvalidAllocation("targets disagree with allocation".into()));
        }
        Ok(spec)
    }
}

/// JSON form; big integers are written as decimal strings.
#[derive(Serialize, Deserialize)]
struct GrammarDoc {
    m: usize,
    alloc: Vec<Vec<String>>,
    targets: Vec<String>,
}

impl From<&GrammarSpec> for GrammarDoc {
    fn from(spec: &GrammarSpec) -> Self {
        Self {
            m: spec.m,
            alloc: spec
                .alloc
                .iter()
                .map(|row| row.iter().map(ToString::to_string).collect())
                .collect(),
            targets: spec.targets.iter().map(ToString::to_string).collect(),
        }
    }
}

/// The grammar whose word `j` appears in exactly a `1/j` share of paths.
pub fn build_grammar(m: usize) -> Result<GrammarSpec> {
    let targets = zipf_targets(m)?;
    let alloc = targets.iter().map(|k| allocate(m, k)).collect::<Result<Vec<_>>>()?;
    Ok(GrammarSpec { m, alloc, targets })
}

/// 0-based lexicographic rank of `prefix` among all sequences of the same
/// length with distinct symbols from `{1..M} \ {excluded}`.
pub fn prefix_rank(prefix: &[usize], excluded: usize, m: usize) -> Result<BigUint> {
    if m == 0 || prefix.len() >= m {
        return Err(Error::InvalidPrefix(format!(
            "length {} needs M > length, got M = {m}",
            prefix.len()
        )));
    }
    let mut used = vec![false; m + 1];
    if (1..=m).contains(&excluded) {
        used[excluded] = true;
    }
    let pool = m - 1;
    let len = prefix.len();
    let mut rank = BigUint::zero();
    for (t, &sym) in prefix.iter().enumerate() {
        if sym == 0 || sym > m {
            return Err(Error::InvalidPrefix(format!("symbol {sym} outside 1..={m}")));
        }
        if sym == excluded {
            return Err(Error::InvalidPrefix(format!("prefix contains excluded symbol {sym}")));
        }
        if used[sym] {
            return Err(Error::InvalidPrefix(format!("symbol {sym} repeated")));
        }
        let smaller = (1..sym).filter(|&s| !used[s]).count();
        if smaller > 0 {
            // completions of the remaining len-t-1 positions from what is left
            rank += falling(pool - t - 1, len - t - 1) * smaller;
        }
        used[sym] = true;
    }
    Ok(rank)
}

/// One root-to-leaf path and the words it emits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSample {
    pub perm: Vec<usize>,
    pub emitted: Vec<usize>,
}

/// Draws a uniform path (Fisher–Yates) and applies the emission rule.
pub fn sample_sentence<R: Rng + ?Sized>(spec: &GrammarSpec, rng: &mut R) -> PathSample {
    let mut perm: Vec<usize> = (1..=spec.m).collect();
    for i in (1..perm.len()).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let emitted = spec
        .emitted_along(&perm)
        .expect("a permutation is always a valid prefix sequence");
    PathSample { perm, emitted }
}

/// Samples `n_sentences` sentences as a corpus over `w1..wM`.
pub fn grammar_stream(spec: &GrammarSpec, n_sentences: usize, seed: u64) -> Result<Corpus> {
    if n_sentences == 0 {
        return Err(Error::EmptyRequest);
    }
    let mut rng = rng::seeded(seed);
    let doc: serde_json::Value = serde_json::to_value(GrammarDoc::from(spec)).expect("grammar serializes");
    let mut corpus = Corpus::new(CorpusMeta {
        source: "grammar".into(),
        generator: Some(serde_json::json!({ "kind": "grammar", "spec": doc })),
        seed: Some(seed),
        ..CorpusMeta::default()
    });
    for _ in 0..n_sentences {
        let sample = sample_sentence(spec, &mut rng);
        let words: Vec<String> = sample.emitted.iter().map(|&w| word_surface(w)).collect();
        corpus.push_sentence(&words)?;
    }
    Ok(corpus)
}

/// Lexicographic successor of a permutation, in place.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Calls `f` on every permutation of `1..=m` in lexicographic order.
pub fn for_each_permutation(m: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (1..=m).collect();
    loop {
        f(&perm);
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

/// Exact distribution over emitted sentences, each path weighted `1/M!`.
pub fn enumerate_all(spec: &GrammarSpec) -> Result<BTreeMap<Vec<usize>, BigRational>> {
    if spec.m > ENUMERATION_CAP {
        return Err(Error::CapacityExceeded(format!(
            "enumeration limited to M <= {ENUMERATION_CAP}, got {}",
            spec.m
        )));
    }
    let mut paths: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut err = None;
    for_each_permutation(spec.m, |perm| match spec.emitted_along(perm) {
        Ok(sentence) => *paths.entry(sentence).or_default() += 1,
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    let total: BigUint = factorial(spec.m);
    Ok(paths
        .into_iter()
        .map(|(s, n)| (s, BigRational::new(n.into(), total.clone().into())))
        .collect())
}

/// Per-word probability that a sentence contains the word, from an
/// enumerated distribution.
pub fn word_marginals(m: usize, dist: &BTreeMap<Vec<usize>, BigRational>) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); m];
    for (sentence, p) in dist {
        for &w in sentence {
            out[w - 1] += p;
        }
    }
    out
}

/// CSV `sentence,probability_num,probability_den`, sentences as
/// space-joined surfaces (empty for the empty sentence).
pub fn distribution_csv(dist: &BTreeMap<Vec<usize>, BigRational>) -> String {
    let mut out = String::from("sentence,probability_num,probability_den\n");
    for (sentence, p) in dist {
        let words: Vec<String> = sentence.iter().map(|&w| word_surface(w)).collect();
        writeln!(out, "{},{},{}", words.join(" "), p.numer(), p.denom()).unwrap();
    }
    out
}

/// Lossy float view of an exact probability, for reports.
pub fn approx(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
