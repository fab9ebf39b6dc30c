//! Comparison inducers: a flat grammar listing the training sequences and a
//! right-regular n-gram grammar.

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::grammar::{Alternative, Grammar, GrammarBuilder, Symbol, VarId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ActivityWeighting {
    /// Proportional to the number of training sequences.
    #[default]
    Counts,
    Uniform,
}

/// `S -> V_1 | ... | V_n` with `V_i` an OR over the distinct training
/// sequences of activity `i`, weighted by frequency.
pub fn induce_flat(corpora: &[(&str, &Corpus)], weighting: ActivityWeighting) -> Result<Grammar> {
    if corpora.is_empty() || corpora.iter().all(|(_, c)| c.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let mut b = GrammarBuilder::new();
    for (_, c) in corpora {
        for t in c.alphabet() {
            b.terminal(&t);
        }
    }
    let start = b.var(&b.fresh_name("S"));
    let used: Vec<&(&str, &Corpus)> = corpora.iter().filter(|(_, c)| !c.is_empty()).collect();
    let total: f64 = match weighting {
        ActivityWeighting::Counts => used.iter().map(|(_, c)| c.len() as f64).sum(),
        ActivityWeighting::Uniform => used.len() as f64,
    };
    let mut top = Vec::with_capacity(used.len());
    for (i, (_, c)) in used.iter().enumerate() {
        let v = b.var(&b.fresh_name(&format!("V_{}", i + 1)));
        let mut counts: BTreeMap<&Vec<String>, usize> = BTreeMap::new();
        for s in &c.sequences {
            *counts.entry(s).or_insert(0) += 1;
        }
        let n = c.len() as f64;
        let alts = counts
            .into_iter()
            .map(|(s, k)| Alternative::new(s.iter().map(|t| b.t(t)).collect(), k as f64 / n))
            .collect();
        b.or(v, alts);
        let w = match weighting {
            ActivityWeighting::Counts => c.len() as f64,
            ActivityWeighting::Uniform => 1.0,
        };
        top.push(Alternative::new(vec![Symbol::V(v)], w / total));
    }
    b.or(start, top);
    b.build(start)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NGramConfig {
    /// Context length identifying a state; `None` keeps the full history.
    pub order: Option<usize>,
    /// Mass moved to unseen continuations that lead to a known state.
    pub smoothing: f64,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            order: None,
            smoothing: 0.0,
        }
    }
}

#[derive(Default)]
struct ContextStats {
    next: BTreeMap<String, usize>,
    ends: usize,
}

/// Right-regular grammar: one variable per context with rules
/// `H -> c H' [p] | ε [p_end]`.
pub fn induce_right_regular(c: &Corpus, cfg: &NGramConfig) -> Result<Grammar> {
    if cfg.order == Some(0) {
        return Err(Error::InvalidConfig("n-gram order must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.smoothing) {
        return Err(Error::InvalidConfig("smoothing must be in [0, 1)".into()));
    }
    if c.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let trunc = |mut h: Vec<String>| -> Vec<String> {
        if let Some(k) = cfg.order {
            if h.len() > k {
                h.drain(..h.len() - k);
            }
        }
        h
    };
    let mut stats: BTreeMap<Vec<String>, ContextStats> = BTreeMap::new();
    stats.insert(Vec::new(), ContextStats::default());
    for s in &c.sequences {
        let mut ctx: Vec<String> = Vec::new();
        for t in s {
            *stats.entry(ctx.clone()).or_default().next.entry(t.clone()).or_insert(0) += 1;
            let mut succ = ctx;
            succ.push(t.clone());
            ctx = trunc(succ);
            stats.entry(ctx.clone()).or_default();
        }
        stats.entry(ctx).or_default().ends += 1;
    }

    let mut b = GrammarBuilder::new();
    let alphabet = c.alphabet();
    for t in &alphabet {
        b.terminal(t);
    }
    let start = b.var(&b.fresh_name("S"));
    let mut vars: BTreeMap<&Vec<String>, VarId> = BTreeMap::new();
    for (i, ctx) in stats.keys().enumerate() {
        let v = if ctx.is_empty() {
            start
        } else {
            b.var(&b.fresh_name(&format!("H_{i}")))
        };
        vars.insert(ctx, v);
    }
    for (ctx, st) in &stats {
        let successor = |t: &String| {
            let mut h = ctx.clone();
            h.push(t.clone());
            trunc(h)
        };
        let seen: usize = st.next.values().sum::<usize>() + st.ends;
        let unseen: Vec<&String> = alphabet
            .iter()
            .filter(|t| !st.next.contains_key(*t) && ctx.last() != Some(*t) && stats.contains_key(&successor(t)))
            .collect();
        let keep = if unseen.is_empty() { 1.0 } else { 1.0 - cfg.smoothing };
        let mut alts = Vec::new();
        for (t, k) in &st.next {
            let v = vars[&successor(t)];
            alts.push(Alternative::new(vec![b.t(t), Symbol::V(v)], keep * *k as f64 / seen as f64));
        }
        if cfg.smoothing > 0.0 {
            for t in &unseen {
                let v = vars[&successor(t)];
                let p = cfg.smoothing / unseen.len() as f64;
                alts.push(Alternative::new(vec![b.t(t), Symbol::V(v)], p));
            }
        }
        if st.ends > 0 {
            alts.push(Alternative::epsilon(keep * st.ends as f64 / seen as f64));
        }
        b.or(vars[ctx], alts);
    }
    b.build(start)
}
