use num_bigint::BigUint;
use proptest::prelude::*;
use zipfkit::facgrammar::{factorial, level_cap, path_count};
use zipfkit::hypothesis::bootstrap_xi;
use zipfkit::rankstats::{fit_sorted_counts, EntropyReport};
use zipfkit::tokenize::delimited_spans;
use zipfkit::{
    allocate, build_grammar, build_rank_table, die_stream, make_die, markov_stream, permutation_test, rng,
    sample_sentence, shannon_entropy, welch_test, Corpus, CorpusMeta, FitParams, MarkovSpec, ResampleUnit,
};

fn corpus_of(sentences: &[Vec<String>]) -> Corpus {
    let mut c = Corpus::new(CorpusMeta::new("test"));
    for s in sentences {
        c.push_sentence(s).unwrap();
    }
    c
}

fn sentences() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 0..10), 1..8)
        .prop_filter("needs a token", |s| s.iter().any(|x| !x.is_empty()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interning_is_a_bijection(sents in sentences()) {
        let c = corpus_of(&sents);
        for tok in c.intern.iter() {
            prop_assert!(!tok.surface.is_empty());
            prop_assert_eq!(c.intern.lookup(tok.surface), Some(tok.id));
        }
        for id in c.tokens() {
            prop_assert!(c.intern.get(id).is_some());
        }
    }

    #[test]
    fn rank_table_shape(sents in sentences()) {
        let c = corpus_of(&sents);
        let t = build_rank_table(&c).unwrap();
        for (i, e) in t.entries.iter().enumerate() {
            prop_assert_eq!(e.rank, i + 1);
        }
        prop_assert!(t.entries.windows(2).all(|w| w[0].count >= w[1].count));
        prop_assert_eq!(t.counts().sum::<u64>(), t.total);
        prop_assert_eq!(t.total, c.token_count());
    }

    #[test]
    fn die_probabilities(m in 1usize..300, xi in 0.0f64..3.0) {
        let d = make_die::<f64>(m, xi).unwrap();
        prop_assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (i, p) in d.probs.iter().enumerate() {
            let want = ((i + 1) as f64).powf(-xi);
            prop_assert!((p / d.probs[0] - want).abs() <= 1e-12 * want);
        }
        prop_assert!(d.cumulative.windows(2).all(|w| w[0] < w[1]));
        prop_assert!((d.cumulative[m - 1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generators_replay_by_seed(seed in any::<u64>(), m in 1usize..20) {
        let d = make_die::<f64>(m, 1.0).unwrap();
        prop_assert_eq!(die_stream(&d, 200, seed).unwrap().to_text(), die_stream(&d, 200, seed).unwrap().to_text());
        let mk = MarkovSpec::cycle(m, 0.3).unwrap();
        let a = markov_stream(&mk, 20, seed).unwrap();
        prop_assert_eq!(a.to_text(), markov_stream(&mk, 20, seed).unwrap().to_text());
        for id in a.tokens() {
            prop_assert!(a.intern.get(id).is_some());
        }
    }

    #[test]
    fn markov_rows_are_stochastic(m in 1usize..30, end in 0.01f64..0.99) {
        for spec in [MarkovSpec::uniform(m, end).unwrap(), MarkovSpec::identity(m, end).unwrap(), MarkovSpec::cycle(m, end).unwrap()] {
            for row in &spec.transition {
                prop_assert!(row.iter().all(|&p| p >= 0.0));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            prop_assert!((spec.initial.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn allocation_respects_caps(m in 1usize..25, frac in 0.0f64..=1.0) {
        let total = factorial(m);
        let k = (&total * BigUint::from((frac * 1e9) as u64)) / BigUint::from(1_000_000_000u64);
        let a = allocate(m, &k).unwrap();
        for (i, ai) in a.iter().enumerate() {
            prop_assert!(*ai <= level_cap(m, i + 1));
        }
        prop_assert_eq!(path_count(m, &a).unwrap(), k);
        prop_assert!(allocate(m, &(total + 1u32)).is_err());
    }

    #[test]
    fn sampled_paths_are_permutations(m in 1usize..30, seed in any::<u64>()) {
        let spec = build_grammar(m).unwrap();
        let mut r = rng::seeded(seed);
        for _ in 0..5 {
            let s = sample_sentence(&spec, &mut r);
            let mut sorted = s.perm.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (1..=m).collect::<Vec<_>>());
            let mut rest = s.perm.iter();
            prop_assert!(s.emitted.iter().all(|w| rest.any(|p| p == w)));
            prop_assert!(s.emitted.contains(&1));
        }
    }

    #[test]
    fn fit_and_entropy_bounds(mut counts in prop::collection::vec(1u64..10_000, 2..60)) {
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let total = counts.iter().sum();
        let fit = fit_sorted_counts::<f64>(&counts, total, &FitParams::default()).unwrap();
        prop_assert!(fit.n_points >= 2);
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        prop_assert!(fit.se_xi >= 0.0);
        let table = zipfkit::RankTable::from_counts(counts.iter().enumerate().map(|(i, &c)| (format!("t{i:03}"), c))).unwrap();
        let EntropyReport { entropy_bits, max_entropy_bits, redundancy, .. } = shannon_entropy::<f64>(&table).unwrap();
        prop_assert!(entropy_bits >= 0.0 && entropy_bits <= max_entropy_bits + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&redundancy));
    }

    #[test]
    fn p_values_are_probabilities(
        a in prop::collection::vec(-5.0f64..5.0, 2..12),
        b in prop::collection::vec(-5.0f64..5.0, 2..12),
        seed in any::<u64>(),
    ) {
        let w = welch_test(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&w.p_value));
        let p = permutation_test(&a, &b, 999, seed).unwrap();
        prop_assert!(p.p_value > 0.0 && p.p_value <= 1.0);
    }

    #[test]
    fn delimiter_tokens_chain(text in "[a-ce ]{0,60}") {
        let spans = delimited_spans(&text, 'e');
        for &(s, e) in &spans {
            prop_assert!(text[s..e].starts_with('e') && text[s..e].ends_with('e') && e - s >= 2);
        }
        for w in spans.windows(2) {
            prop_assert_eq!(w[0].1 - 1, w[1].0);
        }
        prop_assert_eq!(spans.len(), text.matches('e').count().saturating_sub(1));
    }
}

#[test]
fn bootstrap_se_is_non_negative_and_replays() {
    let d = make_die::<f64>(100, 0.8).unwrap();
    let c = die_stream(&d, 20_000, 4).unwrap();
    let params = FitParams::window(1, 50);
    let a = bootstrap_xi::<f64>(&c, &params, 100, ResampleUnit::Block(500), 9).unwrap();
    let b = bootstrap_xi::<f64>(&c, &params, 100, ResampleUnit::Block(500), 9).unwrap();
    assert_eq!(a, b);
    assert!(a.se_boot >= 0.0 && a.ci_lo <= a.ci_hi);
    assert_eq!(a.discarded, 0);
}
