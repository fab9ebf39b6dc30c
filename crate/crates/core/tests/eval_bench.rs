use actgram::bench::{evaluate_sets, run_grammar_eval, synthetic_sets, Algorithm};
use actgram::synth::{GrammarType, SynthConfig};

fn cfg(ty: GrammarType) -> SynthConfig {
    SynthConfig {
        n_grammars: 6,
        grammar_type: ty,
        seed: 12,
        ..SynthConfig::default()
    }
}

#[test]
fn confusion_diagonal_is_recall() {
    for ty in [GrammarType::I, GrammarType::II] {
        for name in ["kari", "flat", "right-regular"] {
            let r = run_grammar_eval(&cfg(ty), &Algorithm::from_name(name, 3).unwrap()).unwrap();
            for (i, s) in r.per_grammar.iter().enumerate() {
                assert_eq!(s.recall, r.confusion[i][i]);
                assert!((0.0..=1.0).contains(&s.precision));
            }
            assert!(r.confusion.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}

#[test]
fn exact_languages_score_perfectly() {
    let r = run_grammar_eval(&cfg(GrammarType::I), &Algorithm::Oracle).unwrap();
    assert_eq!(r.macro_recall, 1.0);
    // distinct random orderings rarely share sequences
    assert!(r.macro_precision > 0.95);
}

#[test]
fn flat_grammar_recall_counts_repeated_sequences() {
    let c = cfg(GrammarType::II);
    let sets = synthetic_sets(&c).unwrap();
    let r = evaluate_sets(&c, &sets, &Algorithm::Flat);
    for (i, s) in sets.iter().enumerate() {
        let hits = s.unseen.iter().filter(|u| s.seen.contains(u)).count();
        assert_eq!(r.per_grammar[i].recall, hits as f64 / s.unseen.len() as f64);
    }
}

#[test]
fn runs_are_deterministic() {
    let a = run_grammar_eval(&cfg(GrammarType::II), &Algorithm::from_name("kari", 3).unwrap()).unwrap();
    let b = run_grammar_eval(&cfg(GrammarType::II), &Algorithm::from_name("kari", 3).unwrap()).unwrap();
    assert_eq!(a.per_grammar_csv().unwrap(), b.per_grammar_csv().unwrap());
    assert_eq!(a.to_string(), b.to_string());
}
