mod common;

use std::collections::BTreeMap;

use actgram::grammar::validate_grammar;
use actgram::parser::{accepts, parse, ParseOptions};
use common::{brute_force_best, derivations, frame_prob, random_grammar, random_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn unlimited_queue_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut with_parse = 0;
    while checked < 300 {
        let sigma = rng.random_range(2..=5);
        let g = random_grammar(sigma, 3, &mut rng);
        if !validate_grammar(&g).is_ok() {
            continue;
        }
        let classes: Vec<String> = (0..sigma).map(|i| format!("x{i}")).collect();
        let frames = rng.random_range(1..=6);
        let max_actions = rng.random_range(1..=4);
        let y = random_matrix(&classes, frames, &mut rng);
        let opts = ParseOptions {
            max_actions,
            early_stop: true,
            ..ParseOptions::unlimited()
        };
        let expected = brute_force_best(&g, &y, max_actions);
        let got = parse(&y, &g, &opts);
        match (expected, got) {
            (None, Err(_)) => {}
            (Some((seq, lp)), Ok(r)) => {
                let total = r.best_logprob;
                assert!((total - lp).abs() < 1e-9, "{g}\nframes {frames}: got {total} for {:?}, want {lp} for {seq:?}", r.best_sequence);
                if r.best_sequence != seq {
                    // only acceptable on an exact tie
                    let alt: f64 = derivations(&g, max_actions)
                        .iter()
                        .filter(|(s, _)| *s == r.best_sequence)
                        .map(|(s, p)| (frame_prob(&y, s) * p).ln())
                        .fold(f64::NEG_INFINITY, f64::max);
                    assert!((alt - lp).abs() < 1e-9, "{g}\nsequence {:?} vs {seq:?}", r.best_sequence);
                }
                with_parse += 1;
            }
            (e, r) => panic!("{g}\nframes {frames} max {max_actions}: oracle {e:?}, parser {r:?}"),
        }
        checked += 1;
    }
    assert!(with_parse > 200, "only {with_parse} instances had a parse");
}

fn all_sequences(sigma: usize, max_len: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for k in 0..sigma {
                let t = format!("x{k}");
                if s.last() == Some(&t) {
                    continue;
                }
                let mut n = s.clone();
                n.push(t);
                out.push(n.clone());
                next.push(n);
            }
        }
        frontier = next;
    }
    out
}

#[test]
fn membership_matches_derivation_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut grammars = 0;
    while grammars < 40 {
        let sigma = rng.random_range(2..=3);
        let g = random_grammar(sigma, 3, &mut rng);
        if !validate_grammar(&g).is_ok() {
            continue;
        }
        grammars += 1;
        let mut language: BTreeMap<Vec<String>, f64> = BTreeMap::new();
        for (s, p) in derivations(&g, 6) {
            if p > 0.0 {
                *language.entry(s).or_default() += p;
            }
        }
        for seq in all_sequences(sigma, 6) {
            let member = language.contains_key(&seq);
            assert_eq!(accepts(&g, &seq), member, "{g}\n{seq:?}");
        }
    }
}
