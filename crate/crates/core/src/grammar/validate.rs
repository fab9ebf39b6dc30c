use std::collections::HashSet;
use std::fmt;

use super::{Grammar, ProbSpec, RecursionStep, RuleBody, Symbol, NORM_TOLERANCE};

/// One violated grammar invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Issue {
    UnknownSymbol { head: String, detail: String },
    NameCollision(String),
    EmptyOr(String),
    ProbOutOfRange { head: String, alt: usize, prob: f64 },
    NotNormalized { head: String, sum: f64 },
    RecursiveShape { head: String, detail: String },
    RecursiveNotNormalized { head: String, prev: usize, sum: f64 },
    Unreachable(String),
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::UnknownSymbol { head, detail } => write!(f, "{head}: unknown symbol {detail}"),
            Issue::NameCollision(n) => write!(f, "`{n}` is both a variable and a terminal"),
            Issue::EmptyOr(h) => write!(f, "{h}: OR rule has no alternatives"),
            Issue::ProbOutOfRange { head, alt, prob } => {
                write!(f, "{head}: alternative {alt} has probability {prob} outside [0, 1]")
            }
            Issue::NotNormalized { head, sum } => write!(f, "{head}: alternatives sum to {sum}"),
            Issue::RecursiveShape { head, detail } => write!(f, "{head}: recursive rule {detail}"),
            Issue::RecursiveNotNormalized { head, prev, sum } => write!(
                f,
                "{head}: recursive probabilities after alternative {prev} sum to {sum}"
            ),
            Issue::Unreachable(v) => write!(f, "{v}: unreachable from the start variable"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Lists every violated invariant; an empty report means well-formed.
pub fn validate_grammar(g: &Grammar) -> ValidationReport {
    let mut issues = Vec::new();
    let terminals: HashSet<&str> = g.terminals.iter().map(String::as_str).collect();
    for v in &g.variables {
        if terminals.contains(v.as_str()) {
            issues.push(Issue::NameCollision(v.clone()));
        }
    }

    for (head, body) in g.rules() {
        let name = g.var_name(head).to_string();
        let check_symbols = |symbols: &[Symbol], issues: &mut Vec<Issue>| {
            for s in symbols {
                let bad = match *s {
                    Symbol::T(t) => (t.index() >= g.num_terminals()).then(|| format!("terminal #{}", t.0)),
                    Symbol::V(v) => (v.index() >= g.num_variables()).then(|| format!("variable #{}", v.0)),
                };
                if let Some(detail) = bad {
                    issues.push(Issue::UnknownSymbol {
                        head: name.clone(),
                        detail,
                    });
                }
            }
        };
        match body {
            RuleBody::And(symbols) => check_symbols(symbols, &mut issues),
            RuleBody::Or(or) => {
                if or.alternatives.is_empty() {
                    issues.push(Issue::EmptyOr(name.clone()));
                    continue;
                }
                for (i, alt) in or.alternatives.iter().enumerate() {
                    check_symbols(&alt.symbols, &mut issues);
                    if !(0.0..=1.0).contains(&alt.prob) {
                        issues.push(Issue::ProbOutOfRange {
                            head: name.clone(),
                            alt: i,
                            prob: alt.prob,
                        });
                    }
                }
                let sum = or.prob_sum();
                if (sum - 1.0).abs() > NORM_TOLERANCE {
                    issues.push(Issue::NotNormalized {
                        head: name.clone(),
                        sum,
                    });
                }
                if let ProbSpec::Recursive(rec) = &or.spec {
                    check_recursive(&name, or, rec, &mut issues);
                }
            }
        }
    }

    if g.start().index() < g.num_variables() {
        let reachable = reachable_variables(g);
        for (i, v) in g.variables.iter().enumerate() {
            if !reachable[i] {
                issues.push(Issue::Unreachable(v.clone()));
            }
        }
    }
    ValidationReport { issues }
}

fn check_recursive(name: &str, or: &super::OrRule, rec: &super::Recursion, issues: &mut Vec<Issue>) {
    let eps: Vec<usize> = (0..or.alternatives.len())
        .filter(|&i| or.alternatives[i].is_epsilon())
        .collect();
    let shape = |detail: String| Issue::RecursiveShape {
        head: name.to_string(),
        detail,
    };
    if eps.len() != 1 {
        issues.push(shape(format!("needs exactly one ε alternative, found {}", eps.len())));
        return;
    }
    if rec.continuation.len() != or.alternatives.len() {
        issues.push(shape(format!(
            "has {} continuation weights for {} alternatives",
            rec.continuation.len(),
            or.alternatives.len()
        )));
        return;
    }
    if rec.continuation.iter().any(|w| !w.is_finite() || *w < 0.0) {
        issues.push(shape("has a negative or non-finite continuation weight".into()));
        return;
    }
    let has_actions = or.alternatives.len() > 1;
    if has_actions && (rec.avg_len.is_nan() || rec.avg_len < 1.0) {
        issues.push(shape(format!("has mean length {} below 1", rec.avg_len)));
        return;
    }
    // probabilities beyond the first step do not depend on n_rec itself
    for prev in 0..or.alternatives.len() {
        if or.alternatives[prev].is_epsilon() {
            continue;
        }
        let step = RecursionStep::new(2, Some(prev));
        let sum: f64 = or.alternative_probs(step).iter().sum();
        if (sum - 1.0).abs() > NORM_TOLERANCE {
            issues.push(Issue::RecursiveNotNormalized {
                head: name.to_string(),
                prev,
                sum,
            });
        }
    }
}

pub(crate) fn reachable_variables(g: &Grammar) -> Vec<bool> {
    let mut seen = vec![false; g.num_variables()];
    let mut stack = vec![g.start()];
    seen[g.start().index()] = true;
    while let Some(v) = stack.pop() {
        let mut visit = |symbols: &[Symbol]| {
            for s in symbols {
                if let Symbol::V(w) = *s {
                    if w.index() < seen.len() && !seen[w.index()] {
                        seen[w.index()] = true;
                        stack.push(w);
                    }
                }
            }
        };
        match g.rule(v) {
            RuleBody::And(symbols) => visit(symbols),
            RuleBody::Or(or) => or.alternatives.iter().for_each(|a| visit(&a.symbols)),
        }
    }
    seen
}
