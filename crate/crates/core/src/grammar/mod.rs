//! Probabilistic context-free activity grammars built from AND and OR rules.
//!
//! Every variable owns exactly one [`RuleBody`]. OR rules carry a probability
//! per alternative; recursive OR rules additionally carry the statistics
//! needed to evaluate their recursion-dependent probabilities (see
//! [`OrRule::alternative_prob`]).

mod format;
mod merge;
mod prob;
mod sample;
mod validate;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub use format::{load_grammar, parse_grammar, save_grammar};
pub use merge::merge_grammars;
pub use prob::{eval_alternative_prob, RecursionCtx, RecursionStep};
pub use sample::{sample_sequence, Sampler, DEFAULT_SAMPLE_ATTEMPTS};
pub use validate::{validate_grammar, Issue, ValidationReport};

/// Absolute tolerance on probability normalization.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T(TermId),
    V(VarId),
}

/// One alternative of an OR rule. An empty symbol list is the ε alternative.
#[derive(Clone, Debug, PartialEq)]
pub struct Alternative {
    pub symbols: Vec<Symbol>,
    /// Static probability, or the first-step probability of a recursive rule.
    pub prob: f64,
}

impl Alternative {
    pub fn new(symbols: Vec<Symbol>, prob: f64) -> Self {
        Alternative { symbols, prob }
    }

    pub fn epsilon(prob: f64) -> Self {
        Alternative {
            symbols: Vec::new(),
            prob,
        }
    }

    pub fn is_epsilon(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Statistics of a recursive OR rule `V -> d_1 V | ... | d_k V | ε`.
///
/// The alternatives' `prob` fields hold the first-step probabilities
/// (`n_rec = 1`). Later steps escape with `1 / avg_len` and split the rest
/// in proportion to `continuation`, skipping the previously chosen
/// alternative unless `allow_repeat` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct Recursion {
    pub avg_len: f64,
    /// One weight per alternative; the ε entry is ignored.
    pub continuation: Vec<f64>,
    pub allow_repeat: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbSpec {
    Static,
    Recursive(Recursion),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrRule {
    pub alternatives: Vec<Alternative>,
    pub spec: ProbSpec,
}

impl OrRule {
    pub fn new(alternatives: Vec<Alternative>) -> Self {
        OrRule {
            alternatives,
            spec: ProbSpec::Static,
        }
    }

    pub fn recursive(alternatives: Vec<Alternative>, recursion: Recursion) -> Self {
        OrRule {
            alternatives,
            spec: ProbSpec::Recursive(recursion),
        }
    }

    pub fn is_recursive(&self) -> bool {
        matches!(self.spec, ProbSpec::Recursive(_))
    }

    pub fn epsilon_index(&self) -> Option<usize> {
        self.alternatives.iter().position(Alternative::is_epsilon)
    }

    /// First-step probability of the ε alternative (0 when there is none).
    pub fn first_escape(&self) -> f64 {
        self.epsilon_index()
            .map(|i| self.alternatives[i].prob)
            .unwrap_or(0.0)
    }

    pub fn prob_sum(&self) -> f64 {
        self.alternatives.iter().map(|a| a.prob).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RuleBody {
    And(Vec<Symbol>),
    Or(OrRule),
}

impl RuleBody {
    /// Number of Earley rules (alternatives) this body expands to.
    pub fn arity(&self) -> usize {
        match self {
            RuleBody::And(_) => 1,
            RuleBody::Or(or) => or.alternatives.len(),
        }
    }

    pub fn alternative_symbols(&self, alt: usize) -> &[Symbol] {
        match self {
            RuleBody::And(symbols) => symbols,
            RuleBody::Or(or) => &or.alternatives[alt].symbols,
        }
    }
}

/// An immutable PCFG over an action alphabet.
#[derive(Clone, Debug)]
pub struct Grammar {
    variables: Vec<String>,
    terminals: Vec<String>,
    rules: Vec<RuleBody>,
    start: VarId,
    var_index: HashMap<String, VarId>,
    term_index: HashMap<String, TermId>,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
            && self.terminals == other.terminals
            && self.rules == other.rules
            && self.start == other.start
    }
}

impl Grammar {
    pub fn start(&self) -> VarId {
        self.start
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.terminals.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.variables[v.index()]
    }

    pub fn term_name(&self, t: TermId) -> &str {
        &self.terminals[t.index()]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn term_id(&self, name: &str) -> Option<TermId> {
        self.term_index.get(name).copied()
    }

    pub fn rule(&self, v: VarId) -> &RuleBody {
        &self.rules[v.index()]
    }

    pub fn rules(&self) -> impl Iterator<Item = (VarId, &RuleBody)> {
        self.rules
            .iter()
            .enumerate()
            .map(|(i, r)| (VarId(i as u32), r))
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::T(t) => self.term_name(t),
            Symbol::V(v) => self.var_name(v),
        }
    }

    /// Maps a token sequence onto terminal ids; `None` if any token is unknown.
    pub fn encode(&self, tokens: &[String]) -> Option<Vec<TermId>> {
        tokens.iter().map(|t| self.term_id(t)).collect()
    }

    pub fn decode(&self, ids: &[TermId]) -> Vec<String> {
        ids.iter().map(|&t| self.term_name(t).to_string()).collect()
    }

    /// Rebuilds the grammar with a different start variable.
    pub fn with_start(&self, start: VarId) -> Grammar {
        Grammar {
            start,
            ..self.clone()
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&save_grammar(self))
    }
}

/// Incremental constructor used by the inducers and the file loader.
#[derive(Debug, Default, Clone)]
pub struct GrammarBuilder {
    variables: Vec<String>,
    terminals: Vec<String>,
    rules: Vec<Option<RuleBody>>,
    var_index: HashMap<String, VarId>,
    term_index: HashMap<String, TermId>,
}

impl GrammarBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a terminal, returning its id.
    pub fn terminal(&mut self, name: &str) -> TermId {
        if let Some(&id) = self.term_index.get(name) {
            return id;
        }
        let id = TermId(self.terminals.len() as u32);
        self.terminals.push(name.to_string());
        self.term_index.insert(name.to_string(), id);
        id
    }

    pub fn t(&mut self, name: &str) -> Symbol {
        Symbol::T(self.terminal(name))
    }

    /// Interns a variable, returning its id. The rule may be supplied later.
    pub fn var(&mut self, name: &str) -> VarId {
        if let Some(&id) = self.var_index.get(name) {
            return id;
        }
        let id = VarId(self.variables.len() as u32);
        self.variables.push(name.to_string());
        self.rules.push(None);
        self.var_index.insert(name.to_string(), id);
        id
    }

    pub fn v(&mut self, name: &str) -> Symbol {
        Symbol::V(self.var(name))
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.var_index.contains_key(name)
    }

    pub fn has_terminal(&self, name: &str) -> bool {
        self.term_index.contains_key(name)
    }

    /// Returns `base` or the first primed variant not yet used by any symbol.
    pub fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.has_var(&name) || self.has_terminal(&name) {
            name.push('\'');
        }
        name
    }

    pub fn has_rule(&self, head: VarId) -> bool {
        self.rules[head.index()].is_some()
    }

    pub fn set_rule(&mut self, head: VarId, body: RuleBody) {
        self.rules[head.index()] = Some(body);
    }

    pub fn and(&mut self, head: VarId, symbols: Vec<Symbol>) {
        self.set_rule(head, RuleBody::And(symbols));
    }

    pub fn or(&mut self, head: VarId, alternatives: Vec<Alternative>) {
        self.set_rule(head, RuleBody::Or(OrRule::new(alternatives)));
    }

    pub fn build(self, start: VarId) -> Result<Grammar> {
        if start.index() >= self.variables.len() {
            return Err(Error::InvalidGrammar("start variable out of range".into()));
        }
        let mut rules = Vec::with_capacity(self.rules.len());
        for (i, r) in self.rules.into_iter().enumerate() {
            match r {
                Some(body) => rules.push(body),
                None => return Err(Error::UndeclaredSymbol(self.variables[i].clone())),
            }
        }
        Ok(Grammar {
            variables: self.variables,
            terminals: self.terminals,
            rules,
            start,
            var_index: self.var_index,
            term_index: self.term_index,
        })
    }
}
