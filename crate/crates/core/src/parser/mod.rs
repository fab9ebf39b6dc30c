//! Breadth-first probabilistic Earley parsing over frame probabilities.
//!
//! The parser is a tree search: every predicted state has exactly one parent
//! and states are never merged. States are grouped in batches `Q(m, n, d)`
//! (prefix length, branch index, depth); the queue pops batches by depth
//! (`Depth` policy) or by prefix probability (`Probability` policy).

mod prefix;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frames::FrameProbMatrix;
use crate::grammar::{Grammar, ProbSpec, RecursionCtx, RuleBody, Symbol, TermId, VarId};
use crate::logspace::ln;

pub use prefix::{extend_prefix, frame_logprob, log_columns, PrefixRecord};
use prefix::PrefixTrie;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueuePolicy {
    /// Shallowest batch first (BEP).
    Depth,
    /// Most probable batch first (GEP).
    Probability,
}

impl fmt::Display for QueuePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueuePolicy::Depth => "bep",
            QueuePolicy::Probability => "gep",
        })
    }
}

impl FromStr for QueuePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bep" | "depth" => Ok(QueuePolicy::Depth),
            "gep" | "probability" => Ok(QueuePolicy::Probability),
            _ => Err(Error::InvalidConfig(format!("unknown queue policy `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseOptions {
    /// Maximum number of queued batches; `None` disables pruning.
    pub queue_size: Option<usize>,
    pub policy: QueuePolicy,
    /// Longest action sequence considered.
    pub max_actions: usize,
    pub early_stop: bool,
    /// Scanning the action that ends the prefix extends the current segment
    /// instead of being dropped.
    pub merge_repeats: bool,
    pub max_pops: Option<usize>,
    pub trace: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            queue_size: Some(20),
            policy: QueuePolicy::Depth,
            max_actions: 20,
            early_stop: true,
            merge_repeats: false,
            max_pops: None,
            trace: false,
        }
    }
}

impl ParseOptions {
    pub fn unlimited() -> Self {
        ParseOptions {
            queue_size: None,
            ..Self::default()
        }
    }
}

/// A complete parse.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub sequence: Vec<String>,
    pub logprob: f64,
    pub grammar_logprob: f64,
}

/// One popped batch.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub m: usize,
    pub n: usize,
    pub depth: u32,
    pub prefix: Vec<String>,
    /// Queue key: frame prefix log-probability plus the best grammar factor.
    pub logprob: f64,
    /// Best grammar factor among the batch's states.
    pub grammar_logprob: f64,
    /// Smallest depth still queued when the batch was popped.
    pub min_queued_depth: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseResult {
    pub best_sequence: Vec<String>,
    pub best_logprob: f64,
    pub grammar_logprob: f64,
    /// Best complete parse of a different sequence found before stopping.
    pub runner_up: Option<Candidate>,
    pub explored_states: usize,
    pub stopped_early: bool,
    pub policy: QueuePolicy,
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RuleRef {
    Root,
    Alt(VarId, usize),
}

#[derive(Clone, Debug)]
struct State {
    rule: RuleRef,
    dot: usize,
    parent: Option<usize>,
    prefix: usize,
    grammar_lp: f64,
    pending_lp: f64,
    ctx: RecursionCtx,
    depth: u32,
}

impl State {
    fn total_grammar(&self) -> f64 {
        self.grammar_lp + self.pending_lp
    }
}

#[derive(Debug)]
struct Batch {
    m: usize,
    n: usize,
    depth: u32,
    prefix: usize,
    states: Vec<usize>,
    key: f64,
    seq: u64,
}

struct Parser<'a> {
    g: &'a Grammar,
    opts: &'a ParseOptions,
    trie: PrefixTrie<'a>,
    states: Vec<State>,
    queue: Vec<Batch>,
    branch_counts: Vec<usize>,
    next_seq: u64,
    depth_cap: u32,
    root_symbols: [Symbol; 1],
    best: Option<(usize, f64, f64)>,
    runner_up: Option<(usize, f64, f64)>,
    stop_at_first: bool,
}

impl<'a> Parser<'a> {
    fn new(g: &'a Grammar, cols: &'a [Vec<f64>], frames: usize, opts: &'a ParseOptions) -> Self {
        let cap = (opts.max_actions + 1) * (g.num_variables() + 1) + 2;
        Parser {
            g,
            opts,
            trie: PrefixTrie::new(cols, frames),
            states: Vec::new(),
            queue: Vec::new(),
            branch_counts: vec![0; opts.max_actions + 2],
            next_seq: 0,
            depth_cap: u32::try_from(cap).unwrap_or(u32::MAX),
            root_symbols: [Symbol::V(g.start())],
            best: None,
            runner_up: None,
            stop_at_first: false,
        }
    }

    fn symbols(&self, rule: RuleRef) -> &[Symbol] {
        match rule {
            RuleRef::Root => &self.root_symbols,
            RuleRef::Alt(v, j) => self.g.rule(v).alternative_symbols(j),
        }
    }

    fn push_batch(&mut self, m: usize, n: usize, depth: u32, prefix: usize, states: Vec<usize>) {
        if states.is_empty() {
            return;
        }
        let frame = self.trie.get(prefix).prefix_logprob;
        let grammar = states
            .iter()
            .map(|&s| self.states[s].total_grammar())
            .fold(f64::NEG_INFINITY, f64::max);
        let key = frame + grammar;
        if key == f64::NEG_INFINITY {
            return;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Batch {
            m,
            n,
            depth,
            prefix,
            states,
            key,
            seq,
        });
    }

    fn tie_break(&self, a: &Batch, b: &Batch) -> Ordering {
        let pa = &self.trie.get(a.prefix).prefix;
        let pb = &self.trie.get(b.prefix).prefix;
        pa.len()
            .cmp(&pb.len())
            .then_with(|| pa.cmp(pb))
            .then_with(|| a.seq.cmp(&b.seq))
    }

    /// `Less` means `a` is popped first.
    fn pop_order(&self, a: &Batch, b: &Batch) -> Ordering {
        let by_prob = b.key.partial_cmp(&a.key).unwrap_or(Ordering::Equal);
        match self.opts.policy {
            QueuePolicy::Depth => a.depth.cmp(&b.depth).then(by_prob),
            QueuePolicy::Probability => by_prob,
        }
        .then_with(|| self.tie_break(a, b))
    }

    fn pop(&mut self) -> Option<Batch> {
        if self.queue.is_empty() {
            return None;
        }
        let mut best = 0;
        for i in 1..self.queue.len() {
            if self.pop_order(&self.queue[i], &self.queue[best]) == Ordering::Less {
                best = i;
            }
        }
        Some(self.queue.swap_remove(best))
    }

    fn prune(&mut self) {
        let Some(limit) = self.opts.queue_size else { return };
        if self.queue.len() <= limit {
            return;
        }
        let mut q = std::mem::take(&mut self.queue);
        q.sort_by(|a, b| {
            b.key
                .partial_cmp(&a.key)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.tie_break(a, b))
        });
        q.truncate(limit);
        self.queue = q;
    }

    fn offer(&mut self, prefix: usize, grammar_lp: f64) {
        let rec = self.trie.get(prefix);
        if rec.prefix.is_empty() {
            return;
        }
        let lp = rec.full_logprob() + grammar_lp;
        if lp == f64::NEG_INFINITY {
            return;
        }
        let same = |c: &Option<(usize, f64, f64)>| c.map(|(p, _, _)| p == prefix).unwrap_or(false);
        let entry = Some((prefix, lp, grammar_lp));
        match self.best {
            None => self.best = entry,
            Some((_, best_lp, _)) => {
                if same(&self.best) {
                    if lp > best_lp {
                        self.best = entry;
                    }
                } else if lp > best_lp {
                    self.runner_up = self.best;
                    self.best = entry;
                } else if same(&self.runner_up) {
                    if lp > self.runner_up.map(|r| r.1).unwrap_or(f64::NEG_INFINITY) {
                        self.runner_up = entry;
                    }
                } else if self.runner_up.map(|r| lp > r.1).unwrap_or(true) {
                    self.runner_up = entry;
                }
            }
        }
    }

    fn decode(&self, prefix: usize) -> Vec<String> {
        self.g.decode(&self.trie.get(prefix).prefix)
    }

    fn run(mut self, trace: &mut Vec<TraceEntry>) -> Result<ParseResult> {
        let root = State {
            rule: RuleRef::Root,
            dot: 0,
            parent: None,
            prefix: PrefixTrie::ROOT,
            grammar_lp: 0.0,
            pending_lp: 0.0,
            ctx: RecursionCtx::new(),
            depth: 0,
        };
        self.states.push(root);
        self.branch_counts[0] = 1;
        self.push_batch(0, 0, 0, PrefixTrie::ROOT, vec![0]);

        let mut explored = 0usize;
        let mut pops = 0usize;
        let mut stopped_early = false;
        while let Some(batch) = self.pop() {
            pops += 1;
            if self.opts.trace {
                let grammar = batch
                    .states
                    .iter()
                    .map(|&s| self.states[s].total_grammar())
                    .fold(f64::NEG_INFINITY, f64::max);
                trace.push(TraceEntry {
                    m: batch.m,
                    n: batch.n,
                    depth: batch.depth,
                    prefix: self.decode(batch.prefix),
                    logprob: batch.key,
                    grammar_logprob: grammar,
                    min_queued_depth: self.queue.iter().map(|b| b.depth).min(),
                });
            }
            explored += batch.states.len();
            self.expand(&batch);

            if self.stop_at_first && self.best.is_some() {
                stopped_early = !self.queue.is_empty();
                break;
            }
            if self.opts.early_stop {
                if let Some((_, best_lp, _)) = self.best {
                    if self.queue.iter().all(|b| best_lp > b.key) {
                        stopped_early = !self.queue.is_empty();
                        break;
                    }
                }
            }
            if self.opts.max_pops.is_some_and(|cap| pops >= cap) {
                stopped_early = !self.queue.is_empty();
                break;
            }
            self.prune();
        }

        let (prefix, logprob, grammar_logprob) = self.best.ok_or(Error::NoParse)?;
        let runner_up = self.runner_up.map(|(p, lp, glp)| Candidate {
            sequence: self.decode(p),
            logprob: lp,
            grammar_logprob: glp,
        });
        Ok(ParseResult {
            best_sequence: self.decode(prefix),
            best_logprob: logprob,
            grammar_logprob,
            runner_up,
            explored_states: explored,
            stopped_early,
            policy: self.opts.policy,
            trace: Vec::new(),
        })
    }

    fn expand(&mut self, batch: &Batch) {
        let mut predicted = Vec::new();
        let mut completed = Vec::new();
        // one new batch per scanned terminal
        let mut scanned: Vec<(TermId, usize, Vec<usize>)> = Vec::new();

        for &sid in &batch.states {
            let s = self.states[sid].clone();
            let next = self.symbols(s.rule).get(s.dot).copied();
            let Some(next) = next else {
                match s.parent {
                    None => self.offer(s.prefix, s.total_grammar()),
                    Some(pid) => {
                        let p = &self.states[pid];
                        let st = State {
                            rule: p.rule,
                            dot: p.dot + 1,
                            parent: p.parent,
                            prefix: s.prefix,
                            grammar_lp: s.grammar_lp,
                            pending_lp: s.pending_lp,
                            ctx: p.ctx.clone(),
                            depth: p.depth,
                        };
                        completed.push(self.add_state(st));
                    }
                }
                continue;
            };
            match next {
                Symbol::V(b) => {
                    if s.depth + 1 > self.depth_cap {
                        continue;
                    }
                    let body = self.g.rule(b);
                    for j in 0..body.arity() {
                        let (p, ctx) = match body {
                            RuleBody::And(_) => (1.0, s.ctx.clone()),
                            RuleBody::Or(or) => match &or.spec {
                                ProbSpec::Static => (or.alternatives[j].prob, s.ctx.clone()),
                                ProbSpec::Recursive(_) => {
                                    let step = s.ctx.step_for(b);
                                    let p = or.alternative_prob(step, j).unwrap_or(0.0);
                                    (p, s.ctx.enter(b, step, j))
                                }
                            },
                        };
                        if p <= 0.0 {
                            continue;
                        }
                        let st = State {
                            rule: RuleRef::Alt(b, j),
                            dot: 0,
                            parent: Some(sid),
                            prefix: s.prefix,
                            grammar_lp: s.grammar_lp,
                            pending_lp: s.pending_lp + ln(p),
                            ctx,
                            depth: s.depth + 1,
                        };
                        predicted.push(self.add_state(st));
                    }
                }
                Symbol::T(x) => {
                    let rec = self.trie.get(s.prefix);
                    let new_prefix = if rec.last() == Some(x) {
                        if !self.opts.merge_repeats {
                            continue;
                        }
                        s.prefix
                    } else {
                        if rec.prefix.len() >= self.opts.max_actions {
                            continue;
                        }
                        let id = self.trie.extend(s.prefix, x);
                        if self.trie.get(id).prefix_logprob == f64::NEG_INFINITY {
                            continue;
                        }
                        id
                    };
                    let st = State {
                        rule: s.rule,
                        dot: s.dot + 1,
                        parent: s.parent,
                        prefix: new_prefix,
                        grammar_lp: s.total_grammar(),
                        pending_lp: 0.0,
                        ctx: s.ctx.clone(),
                        depth: s.depth,
                    };
                    let id = self.add_state(st);
                    match scanned.iter_mut().find(|(t, p, _)| *t == x && *p == new_prefix) {
                        Some((_, _, v)) => v.push(id),
                        None => scanned.push((x, new_prefix, vec![id])),
                    }
                }
            }
        }

        self.push_batch(batch.m, batch.n, batch.depth + 1, batch.prefix, predicted);
        if let Some(d) = batch.depth.checked_sub(1) {
            self.push_batch(batch.m, batch.n, d, batch.prefix, completed);
        } else {
            debug_assert!(completed.is_empty());
        }
        for (_, prefix, ids) in scanned {
            let m = self.trie.get(prefix).prefix.len();
            if m >= self.branch_counts.len() {
                self.branch_counts.resize(m + 1, 0);
            }
            let n = self.branch_counts[m];
            self.branch_counts[m] += 1;
            self.push_batch(m, n, batch.depth, prefix, ids);
        }
    }

    fn add_state(&mut self, s: State) -> usize {
        self.states.push(s);
        self.states.len() - 1
    }
}

/// Finds the most probable action sequence of `g` for the frames `y`.
pub fn parse(y: &FrameProbMatrix, g: &Grammar, opts: &ParseOptions) -> Result<ParseResult> {
    if opts.max_actions == 0 {
        return Err(Error::InvalidConfig("max_actions must be positive".into()));
    }
    if opts.queue_size == Some(0) {
        return Err(Error::InvalidConfig("queue size must be positive".into()));
    }
    let cols = log_columns(y, g);
    let parser = Parser::new(g, &cols, y.frames(), opts);
    let mut trace = Vec::new();
    let mut result = parser.run(&mut trace)?;
    result.trace = trace;
    Ok(result)
}

/// Whether `g` derives exactly `seq`, tested by parsing a one-hot matrix
/// with one frame per action.
pub fn accepts(g: &Grammar, seq: &[String]) -> bool {
    let Some(ids) = g.encode(seq) else {
        return false;
    };
    accepts_ids(g, &ids)
}

pub fn accepts_ids(g: &Grammar, ids: &[TermId]) -> bool {
    if ids.is_empty() {
        return false;
    }
    let frames = ids.len();
    let cols: Vec<Vec<f64>> = (0..g.num_terminals())
        .map(|k| {
            ids.iter()
                .map(|t| if t.index() == k { 0.0 } else { f64::NEG_INFINITY })
                .collect()
        })
        .collect();
    let opts = ParseOptions {
        queue_size: None,
        max_actions: frames,
        early_stop: false,
        ..ParseOptions::default()
    };
    let mut parser = Parser::new(g, &cols, frames, &opts);
    parser.stop_at_first = true;
    let mut trace = Vec::new();
    parser.run(&mut trace).is_ok()
}

/// Log-probability of `seq` under `y` with the given grammar factor,
/// recomputed from scratch.
pub fn replay_logprob(y: &FrameProbMatrix, g: &Grammar, seq: &[String], grammar_logprob: f64) -> f64 {
    match g.encode(seq) {
        Some(ids) => frame_logprob(&log_columns(y, g), y.frames(), &ids) + grammar_logprob,
        None => f64::NEG_INFINITY,
    }
}
