//! Brute-force reference implementations shared by integration tests.
#![allow(dead_code)]

use actgram::frames::FrameProbMatrix;
use actgram::grammar::{Alternative, Grammar, GrammarBuilder, OrRule, ProbSpec, Recursion, RuleBody, Symbol, VarId};
use rand::Rng;

/// Every derivation yielding at most `max_len` terminals, as
/// (terminal names, derivation probability). Recursive OR rules are
/// expanded with their step-dependent probabilities computed here.
pub fn derivations(g: &Grammar, max_len: usize) -> Vec<(Vec<String>, f64)> {
    expand_var(g, g.start(), max_len)
}

fn expand_var(g: &Grammar, v: VarId, budget: usize) -> Vec<(Vec<String>, f64)> {
    match g.rule(v) {
        RuleBody::And(symbols) => expand_seq(g, symbols, budget),
        RuleBody::Or(or) => match &or.spec {
            ProbSpec::Static => {
                let mut out = Vec::new();
                for alt in &or.alternatives {
                    if alt.prob <= 0.0 {
                        continue;
                    }
                    for (s, p) in expand_seq(g, &alt.symbols, budget) {
                        out.push((s, p * alt.prob));
                    }
                }
                out
            }
            ProbSpec::Recursive(rec) => expand_recursive(g, v, or, rec, budget),
        },
    }
}

fn expand_seq(g: &Grammar, symbols: &[Symbol], budget: usize) -> Vec<(Vec<String>, f64)> {
    let mut partial: Vec<(Vec<String>, f64)> = vec![(Vec::new(), 1.0)];
    for &s in symbols {
        let mut next = Vec::new();
        for (prefix, p) in &partial {
            let room = budget - prefix.len();
            let parts = match s {
                Symbol::T(t) => {
                    if room == 0 {
                        continue;
                    }
                    vec![(vec![g.term_name(t).to_string()], 1.0)]
                }
                Symbol::V(w) => expand_var(g, w, room),
            };
            for (tail, q) in parts {
                let mut seq = prefix.clone();
                seq.extend(tail);
                next.push((seq, p * q));
            }
        }
        partial = next;
    }
    partial
}

/// Probabilities of every alternative after alternative `prev` was chosen
/// at a step beyond the first.
fn later_step(or: &OrRule, rec: &Recursion, prev: usize) -> Vec<f64> {
    let eps = or.alternatives.iter().position(|a| a.symbols.is_empty()).unwrap();
    let escape = (1.0 / rec.avg_len).min(1.0);
    let allowed = |l: usize| l != eps && (rec.allow_repeat || l != prev);
    let denom: f64 = (0..or.alternatives.len()).filter(|&l| allowed(l)).map(|l| rec.continuation[l]).sum();
    (0..or.alternatives.len())
        .map(|j| {
            if denom <= 0.0 {
                return if j == eps { 1.0 } else { 0.0 };
            }
            if j == eps {
                escape
            } else if allowed(j) {
                rec.continuation[j] * (1.0 - escape) / denom
            } else {
                0.0
            }
        })
        .collect()
}

fn expand_recursive(g: &Grammar, v: VarId, or: &OrRule, rec: &Recursion, budget: usize) -> Vec<(Vec<String>, f64)> {
    let mut out = Vec::new();
    // state: emitted terminals, probability, previous alternative
    let mut frontier: Vec<(Vec<String>, f64, Option<usize>)> = vec![(Vec::new(), 1.0, None)];
    while let Some((seq, p, prev)) = frontier.pop() {
        let probs: Vec<f64> = match prev {
            None => or.alternatives.iter().map(|a| a.prob).collect(),
            Some(q) => later_step(or, rec, q),
        };
        for (j, alt) in or.alternatives.iter().enumerate() {
            if probs[j] <= 0.0 {
                continue;
            }
            if alt.symbols.is_empty() {
                out.push((seq.clone(), p * probs[j]));
                continue;
            }
            // alternatives have the shape `d_j V`
            let body: Vec<Symbol> = alt.symbols.iter().copied().filter(|&s| s != Symbol::V(v)).collect();
            for (tail, q) in expand_seq(g, &body, budget - seq.len()) {
                let mut s = seq.clone();
                s.extend(tail);
                if s.len() > budget {
                    continue;
                }
                frontier.push((s, p * probs[j] * q, Some(j)));
            }
        }
    }
    out
}

/// Probability that frames `0..T` are labelled exactly `seq`, summed over
/// every allocation of at least one frame per action.
pub fn frame_prob(y: &FrameProbMatrix, seq: &[String]) -> f64 {
    let n = seq.len();
    let t = y.frames();
    if n == 0 || n > t {
        return 0.0;
    }
    let cls: Vec<Option<usize>> = seq.iter().map(|a| y.class_index(a)).collect();
    if cls.iter().any(Option::is_none) {
        return 0.0;
    }
    let cls: Vec<usize> = cls.into_iter().map(Option::unwrap).collect();
    let mut total = 0.0;
    for_each_composition(t, n, &mut |lengths| {
        let mut p = 1.0;
        let mut f = 0;
        for (k, &l) in lengths.iter().enumerate() {
            for _ in 0..l {
                p *= y.get(f, cls[k]);
                f += 1;
            }
        }
        total += p;
    });
    total
}

/// Calls `f` with every way of writing `t` as `n` positive parts.
pub fn for_each_composition(t: usize, n: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(rest: usize, left: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if left == 1 {
            acc.push(rest);
            f(acc);
            acc.pop();
            return;
        }
        for l in 1..=rest - (left - 1) {
            acc.push(l);
            go(rest - l, left - 1, acc, f);
            acc.pop();
        }
    }
    if n == 0 || n > t {
        return;
    }
    go(t, n, &mut Vec::new(), f);
}

/// Best (sequence, log-probability) over derivations, by enumeration.
pub fn brute_force_best(
    g: &Grammar,
    y: &FrameProbMatrix,
    max_actions: usize,
) -> Option<(Vec<String>, f64)> {
    let mut best: Option<(Vec<String>, f64)> = None;
    for (seq, p) in derivations(g, max_actions) {
        if seq.is_empty() || has_adjacent_repeat(&seq) || p <= 0.0 {
            continue;
        }
        let lp = (frame_prob(y, &seq) * p).ln();
        if lp > f64::NEG_INFINITY && best.as_ref().is_none_or(|(_, b)| lp > *b) {
            best = Some((seq, lp));
        }
    }
    best
}

pub fn has_adjacent_repeat(seq: &[String]) -> bool {
    seq.windows(2).any(|w| w[0] == w[1])
}

pub fn random_matrix<R: Rng>(classes: &[String], frames: usize, rng: &mut R) -> FrameProbMatrix {
    let rows = (0..frames)
        .map(|_| {
            let r: Vec<f64> = (0..classes.len()).map(|_| rng.random::<f64>() + 0.01).collect();
            let z: f64 = r.iter().sum();
            r.into_iter().map(|x| x / z).collect()
        })
        .collect();
    FrameProbMatrix::new(classes.to_vec(), rows).unwrap()
}

fn random_probs<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let z: f64 = r.iter().sum();
    r.into_iter().map(|x| x / z).collect()
}

/// Random grammar of nesting depth at most `max_depth` over `sigma`
/// terminals, mixing AND rules, static OR rules (possibly with ε) and
/// recursive OR groups.
pub fn random_grammar<R: Rng>(sigma: usize, max_depth: usize, rng: &mut R) -> Grammar {
    let names: Vec<String> = (0..sigma).map(|i| format!("x{i}")).collect();
    let mut b = GrammarBuilder::new();
    let mut counter = 0usize;
    let start = b.var("S");
    fill_var(&mut b, start, &names, 1, max_depth, &mut counter, rng);
    b.build(start).unwrap()
}

fn fill_var<R: Rng>(
    b: &mut GrammarBuilder,
    head: VarId,
    names: &[String],
    depth: usize,
    max_depth: usize,
    counter: &mut usize,
    rng: &mut R,
) {
    let symbol = |b: &mut GrammarBuilder, counter: &mut usize, rng: &mut R| -> Symbol {
        if depth < max_depth && rng.random::<f64>() < 0.4 {
            *counter += 1;
            let v = b.var(&format!("V{counter}"));
            fill_var(b, v, names, depth + 1, max_depth, counter, rng);
            Symbol::V(v)
        } else {
            let t = &names[rng.random_range(0..names.len())];
            b.t(t)
        }
    };
    match rng.random_range(0..3) {
        0 => {
            let n = rng.random_range(1..=2);
            let syms = (0..n).map(|_| symbol(b, counter, rng)).collect();
            b.and(head, syms);
        }
        1 => {
            let n = rng.random_range(1..=3);
            let with_eps = rng.random::<f64>() < 0.3;
            let probs = random_probs(n + usize::from(with_eps), rng);
            let mut alts: Vec<Alternative> = (0..n)
                .map(|i| {
                    let k = rng.random_range(1..=2);
                    Alternative::new((0..k).map(|_| symbol(b, counter, rng)).collect(), probs[i])
                })
                .collect();
            if with_eps {
                alts.push(Alternative::epsilon(probs[n]));
            }
            b.or(head, alts);
        }
        _ => {
            let k = rng.random_range(1..=names.len().min(3));
            let with_eps = rng.random::<f64>() < 0.5;
            let probs = random_probs(k + usize::from(with_eps), rng);
            let mut picked: Vec<usize> = (0..names.len()).collect();
            for i in 0..k {
                let j = rng.random_range(i..picked.len());
                picked.swap(i, j);
            }
            let mut alts: Vec<Alternative> = (0..k)
                .map(|i| Alternative::new(vec![b.t(&names[picked[i]]), Symbol::V(head)], probs[i]))
                .collect();
            alts.push(Alternative::epsilon(if with_eps { probs[k] } else { 0.0 }));
            if !with_eps {
                // keep the first step normalized without ε
                let z: f64 = alts.iter().map(|a| a.prob).sum();
                alts.iter_mut().for_each(|a| a.prob /= z);
            }
            let mut continuation: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
            continuation.push(0.0);
            b.set_rule(
                head,
                RuleBody::Or(OrRule::recursive(
                    alts,
                    Recursion {
                        avg_len: 1.0 + 2.0 * rng.random::<f64>(),
                        continuation,
                        allow_repeat: false,
                    },
                )),
            );
        }
    }
}
