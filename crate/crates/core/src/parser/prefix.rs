use std::collections::HashMap;

use crate::frames::FrameProbMatrix;
use crate::grammar::{Grammar, TermId};
use crate::logspace::{ln, log_sum, log_sum_all};

/// Parsing and prefix log-probabilities of one action sequence.
///
/// `parse_log[t]` is `log p(F_{1:t+1} -> a)`; `prefix_logprob` is
/// `log p(F_{1:T} -> a...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixRecord {
    pub prefix: Vec<TermId>,
    pub parse_log: Vec<f64>,
    pub prefix_logprob: f64,
    pub trans_logprob: f64,
}

impl PrefixRecord {
    /// The empty sequence over `frames` frames.
    pub fn empty(frames: usize) -> Self {
        PrefixRecord {
            prefix: Vec::new(),
            parse_log: vec![f64::NEG_INFINITY; frames],
            prefix_logprob: 0.0,
            trans_logprob: 0.0,
        }
    }

    pub fn last(&self) -> Option<TermId> {
        self.prefix.last().copied()
    }

    /// Log-probability that the sequence labels all frames.
    pub fn full_logprob(&self) -> f64 {
        self.parse_log.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Extends `rec` by terminal `x` whose per-frame log-probabilities are
/// `log_col`, with transition log-probability `log_g`.
pub fn extend_prefix(rec: &PrefixRecord, x: TermId, log_col: &[f64], log_g: f64) -> PrefixRecord {
    let frames = log_col.len();
    let mut parse = vec![f64::NEG_INFINITY; frames];
    let only_x = rec.prefix.is_empty();
    if frames > 0 && only_x {
        parse[0] = log_g + log_col[0];
    }
    for t in 1..frames {
        let stay = parse[t - 1];
        let enter = log_g + rec.parse_log[t - 1];
        parse[t] = log_col[t] + log_sum(stay, enter);
    }
    let prefix_logprob = if only_x {
        parse.first().copied().unwrap_or(f64::NEG_INFINITY)
    } else {
        log_sum_all((1..frames).map(|t| log_g + log_col[t] + rec.parse_log[t - 1]))
    };
    let mut prefix = rec.prefix.clone();
    prefix.push(x);
    PrefixRecord {
        prefix,
        parse_log: parse,
        prefix_logprob,
        trans_logprob: log_g,
    }
}

/// Log-probability columns of `y` indexed by the terminals of `g`;
/// terminals without a matching class get `-inf` everywhere.
pub fn log_columns(y: &FrameProbMatrix, g: &Grammar) -> Vec<Vec<f64>> {
    g.terminals()
        .iter()
        .map(|name| match y.class_index(name) {
            Some(k) => (0..y.frames()).map(|t| ln(y.get(t, k))).collect(),
            None => vec![f64::NEG_INFINITY; y.frames()],
        })
        .collect()
}

/// Frame log-likelihood of a complete sequence with all transitions at 1.
pub fn frame_logprob(cols: &[Vec<f64>], frames: usize, seq: &[TermId]) -> f64 {
    let mut rec = PrefixRecord::empty(frames);
    for &x in seq {
        rec = extend_prefix(&rec, x, &cols[x.index()], 0.0);
    }
    if seq.is_empty() {
        f64::NEG_INFINITY
    } else {
        rec.full_logprob()
    }
}

/// Records shared across parser states, deduplicated by prefix. Transition
/// factors are kept out of the records, so one record serves every
/// derivation reaching the same prefix.
pub(crate) struct PrefixTrie<'c> {
    cols: &'c [Vec<f64>],
    pub records: Vec<PrefixRecord>,
    children: HashMap<(usize, TermId), usize>,
}

impl<'c> PrefixTrie<'c> {
    pub fn new(cols: &'c [Vec<f64>], frames: usize) -> Self {
        PrefixTrie {
            cols,
            records: vec![PrefixRecord::empty(frames)],
            children: HashMap::new(),
        }
    }

    pub const ROOT: usize = 0;

    pub fn extend(&mut self, id: usize, x: TermId) -> usize {
        if let Some(&c) = self.children.get(&(id, x)) {
            return c;
        }
        let rec = extend_prefix(&self.records[id], x, &self.cols[x.index()], 0.0);
        let c = self.records.len();
        self.records.push(rec);
        self.children.insert((id, x), c);
        c
    }

    pub fn get(&self, id: usize) -> &PrefixRecord {
        &self.records[id]
    }
}
