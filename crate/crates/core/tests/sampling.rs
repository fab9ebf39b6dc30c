mod common;

use std::collections::BTreeMap;

use actgram::corpus::Corpus;
use actgram::grammar::{load_grammar, parse_grammar, save_grammar, Alternative, GrammarBuilder, OrRule, Recursion, RuleBody, Sampler, Symbol};
use actgram::kari;
use actgram::parser::accepts;
use common::derivations;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn group_grammar(avg_len: f64) -> actgram::grammar::Grammar {
    let mut b = GrammarBuilder::new();
    let s = b.var("S");
    let v = b.var("V");
    let terms: Vec<Symbol> = ["a", "b", "c"].iter().map(|t| b.t(t)).collect();
    let alts = terms
        .iter()
        .map(|&t| Alternative::new(vec![t, Symbol::V(v)], 1.0 / 3.0))
        .chain(std::iter::once(Alternative::epsilon(0.0)))
        .collect();
    b.set_rule(
        v,
        RuleBody::Or(OrRule::recursive(
            alts,
            Recursion {
                avg_len,
                continuation: vec![1.0, 2.0, 3.0, 0.0],
                allow_repeat: false,
            },
        )),
    );
    b.and(s, vec![Symbol::V(v)]);
    b.build(s).unwrap()
}

/// Mean number of recursions after the first step, over `n` samples.
pub fn mean_later_recursions(avg_len: f64, n: usize, seed: u64) -> f64 {
    let g = group_grammar(avg_len);
    let sampler = Sampler::new(&g, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = (0..n).map(|_| sampler.sample(&mut rng).unwrap().len() - 1).sum();
    total as f64 / n as f64
}

#[test]
fn escape_probability_matches_mean_length() {
    for avg in [1.5, 3.0, 5.0] {
        let m = mean_later_recursions(avg, 20_000, 11);
        assert!((m - (avg - 1.0)).abs() <= 0.05 * (avg - 1.0), "avg {avg}: {m}");
    }
}

/// Upper 0.1% point of the chi-square distribution (Wilson-Hilferty).
fn chi_square_critical(df: f64) -> f64 {
    let z = 3.090;
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn sampler_frequencies_fit_derivation_probabilities() {
    let g = parse_grammar(
        "S -> A B\n\
         A -> 'x' [0.2] | 'y' 'x' [0.5] | <eps> [0.3]\n\
         B -> 'z' [0.7] | 'w' 'z' [0.3]\n",
    )
    .unwrap();
    let mut expected: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    for (s, p) in derivations(&g, 10) {
        *expected.entry(s).or_default() += p;
    }
    let n = 20_000;
    let sampler = Sampler::new(&g, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut observed: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for _ in 0..n {
        *observed.entry(sampler.sample_tokens(&mut rng).unwrap()).or_default() += 1;
    }
    assert!(observed.keys().all(|k| expected.contains_key(k)));
    let stat: f64 = expected
        .iter()
        .map(|(k, p)| {
            let e = p * n as f64;
            let o = *observed.get(k).unwrap_or(&0) as f64;
            (o - e).powi(2) / e
        })
        .sum();
    let df = (expected.len() - 1) as f64;
    assert!(stat < chi_square_critical(df), "chi2 {stat} with {df} dof");
}

#[test]
fn saved_grammar_samples_identically() {
    let c = Corpus::from_slices(&[
        &["take_cup", "pour_coffee", "pour_milk"],
        &["pour_coffee", "spoon_sugar", "pour_milk"],
        &["take_cup", "pour_coffee", "pour_milk", "spoon_sugar", "stir_coffee"],
        &["pour_coffee", "spoon_sugar", "stir_coffee"],
    ]);
    let g = kari::induce(&c, 1).unwrap();
    let reloaded = load_grammar(&save_grammar(&g)).unwrap();
    let a = Sampler::new(&g, 30);
    let b = Sampler::new(&reloaded, 30);
    let mut ra = ChaCha8Rng::seed_from_u64(8);
    let mut rb = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let s = a.sample_tokens(&mut ra).unwrap();
        assert_eq!(s, b.sample_tokens(&mut rb).unwrap());
        assert!(accepts(&g, &s), "{s:?}");
        assert!(s.iter().filter(|t| *t == "pour_coffee").count() == 1);
    }
}
