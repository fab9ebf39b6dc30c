//! Random activity grammars for benchmarking induction algorithms.
//!
//! A synthetic grammar is `S -> B_1 B_2 ... B_k` over a terminal set shared
//! by every grammar of a benchmark. Each block holds one or more terminals,
//! kept in a fixed order or (for pairs and longer runs) in either direction.
//! Blocks without a key terminal may be skipped.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grammar::{Alternative, Grammar, GrammarBuilder, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GrammarType {
    /// Every terminal appears under exactly one variable.
    #[default]
    I,
    /// Non-key terminals may be reused by several variables.
    II,
}

impl std::str::FromStr for GrammarType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(GrammarType::I),
            "II" | "2" => Ok(GrammarType::II),
            _ => Err(Error::InvalidConfig(format!("unknown grammar type `{s}`"))),
        }
    }
}

impl std::fmt::Display for GrammarType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GrammarType::I => "I",
            GrammarType::II => "II",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_grammars: usize,
    /// Variables per grammar, the start variable included.
    pub n_variables: usize,
    pub n_terminals: usize,
    pub grammar_type: GrammarType,
    pub n_key_terminals: usize,
    pub seed: u64,
    pub seq_per_grammar: usize,
    pub seen_fraction: f64,
    /// Probability that a block without key terminals can be skipped.
    pub optional_prob: f64,
    /// Probability that a block of two or more terminals is order-free.
    pub free_order_prob: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_grammars: 20,
            n_variables: 10,
            n_terminals: 10,
            grammar_type: GrammarType::I,
            n_key_terminals: 3,
            seed: 0,
            seq_per_grammar: 50,
            seen_fraction: 0.5,
            optional_prob: 0.5,
            free_order_prob: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.n_key_terminals == 0 || self.n_key_terminals > self.n_terminals {
            return bad("need 1 <= key terminals <= terminals");
        }
        if self.n_variables < 2 {
            return bad("need at least two variables");
        }
        if !(self.seen_fraction > 0.0 && self.seen_fraction < 1.0) {
            return bad("seen fraction must lie strictly between 0 and 1");
        }
        if !(0.0..=1.0).contains(&self.optional_prob) || !(0.0..=1.0).contains(&self.free_order_prob) {
            return bad("block probabilities must lie in [0, 1]");
        }
        if self.n_grammars == 0 || self.seq_per_grammar < 2 {
            return bad("need at least one grammar and two sequences per grammar");
        }
        Ok(())
    }

    /// Upper bound on the length of any sampled sequence.
    pub fn max_len(&self) -> usize {
        2 * self.n_variables.max(self.n_terminals) + 2
    }

    pub fn terminal_names(&self) -> Vec<String> {
        (0..self.n_terminals).map(|i| format!("t{i}")).collect()
    }
}

/// Builds grammar number `index` of a benchmark.
pub fn generate_synthetic_grammar<R: Rng + ?Sized>(cfg: &SynthConfig, index: usize, rng: &mut R) -> Result<Grammar> {
    cfg.validate()?;
    let names = cfg.terminal_names();
    let mut order: Vec<usize> = (0..cfg.n_terminals).collect();
    order.shuffle(rng);
    let (keys, rest) = order.split_at(cfg.n_key_terminals);
    let n_blocks = (cfg.n_variables - 1).min(cfg.n_terminals);
    let blocks = match cfg.grammar_type {
        GrammarType::I => partition_type_one(keys, rest, n_blocks, rng),
        GrammarType::II => assign_type_two(keys, rest, n_blocks, rng),
    };

    let mut uses = vec![0usize; cfg.n_terminals];
    for b in &blocks {
        for &t in b {
            uses[t] += 1;
        }
    }

    let mut gb = GrammarBuilder::new();
    for n in &names {
        gb.terminal(n);
    }
    let start = gb.var("S");
    let mut body = Vec::with_capacity(blocks.len());
    for (i, block) in blocks.iter().enumerate() {
        let head = gb.var(&format!("B{index}_{i}"));
        body.push(Symbol::V(head));
        let forward: Vec<Symbol> = block.iter().map(|&t| gb.t(&names[t])).collect();
        let has_key = block.iter().any(|t| keys.contains(t));
        // reused terminals are never mandatory, so only keys are guaranteed universal
        let optional = !has_key && (block.iter().any(|&t| uses[t] > 1) || rng.random::<f64>() < cfg.optional_prob);
        let free = block.len() > 1 && rng.random::<f64>() < cfg.free_order_prob;
        let mut alts = vec![forward.clone()];
        if free {
            alts.push(forward.iter().rev().copied().collect());
        }
        if !optional && alts.len() == 1 {
            gb.and(head, forward);
            continue;
        }
        let share = if optional { 0.5 } else { 1.0 } / alts.len() as f64;
        let mut or: Vec<Alternative> = alts.into_iter().map(|s| Alternative::new(s, share)).collect();
        if optional {
            or.push(Alternative::epsilon(0.5));
        }
        gb.or(head, or);
    }
    gb.and(start, body);
    gb.build(start)
}

fn partition_type_one<R: Rng + ?Sized>(keys: &[usize], rest: &[usize], n_blocks: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut all: Vec<usize> = keys.iter().chain(rest).copied().collect();
    all.shuffle(rng);
    let mut sizes = vec![1usize; n_blocks];
    for _ in n_blocks..all.len() {
        let i = rng.random_range(0..n_blocks);
        sizes[i] += 1;
    }
    let mut it = all.into_iter();
    sizes.into_iter().map(|k| it.by_ref().take(k).collect()).collect()
}

fn assign_type_two<R: Rng + ?Sized>(keys: &[usize], rest: &[usize], n_blocks: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n_blocks];
    let mut slots: Vec<usize> = (0..n_blocks).collect();
    slots.shuffle(rng);
    for (&k, &b) in keys.iter().zip(slots.iter().cycle()) {
        blocks[b].push(k);
    }
    if rest.is_empty() {
        blocks.retain(|b| !b.is_empty());
        return blocks;
    }
    for i in 0..n_blocks {
        // a filler next to a key would be mandatory; reuse must stay optional
        if !blocks[i].is_empty() {
            continue;
        }
        let target = if rng.random::<f64>() < 0.3 { 2 } else { 1 };
        let mut tries = 0;
        while blocks[i].len() < target && tries < 16 {
            tries += 1;
            let t = rest[rng.random_range(0..rest.len())];
            let near = |j: usize| blocks.get(j).is_some_and(|b| b.contains(&t));
            if near(i) || (i > 0 && near(i - 1)) || near(i + 1) {
                continue;
            }
            blocks[i].push(t);
        }
    }
    blocks.retain(|b| !b.is_empty());
    for b in &mut blocks {
        b.shuffle(rng);
    }
    blocks
}
