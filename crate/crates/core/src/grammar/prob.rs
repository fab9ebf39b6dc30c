use std::rc::Rc;

use super::{OrRule, ProbSpec, VarId};
use crate::error::{Error, Result};

/// Position inside a recursive OR expansion: how many times the rule has
/// been entered on the current derivation path, and which alternative was
/// chosen the previous time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RecursionStep {
    pub n_rec: u32,
    pub prev: Option<usize>,
}

impl RecursionStep {
    pub const FIRST: RecursionStep = RecursionStep {
        n_rec: 1,
        prev: None,
    };

    pub fn new(n_rec: u32, prev: Option<usize>) -> Self {
        RecursionStep { n_rec, prev }
    }
}

impl Default for RecursionStep {
    fn default() -> Self {
        Self::FIRST
    }
}

/// Probability of choosing alternative `j` of `rule` at `step`.
///
/// Static rules return the stored probability. Recursive rules use the
/// stored first-step probabilities when `n_rec = 1`; afterwards the ε
/// alternative gets `1 / avg_len`, the previous choice gets 0 (unless
/// repeats are allowed) and the remaining mass is shared in proportion to
/// the continuation weights.
pub fn eval_alternative_prob(rule: &OrRule, step: RecursionStep, j: usize) -> Result<f64> {
    let len = rule.alternatives.len();
    if j >= len {
        return Err(Error::InvalidAlternative { index: j, len });
    }
    let rec = match &rule.spec {
        ProbSpec::Static => return Ok(rule.alternatives[j].prob),
        ProbSpec::Recursive(rec) => rec,
    };
    if step.n_rec <= 1 {
        return Ok(rule.alternatives[j].prob);
    }
    if rec.avg_len <= 0.0 {
        return Err(Error::DegenerateGroup);
    }
    let escape = (1.0 / rec.avg_len).min(1.0);
    let excluded = if rec.allow_repeat { None } else { step.prev };
    let weight = |l: usize| -> f64 {
        if rule.alternatives[l].is_epsilon() || Some(l) == excluded {
            0.0
        } else {
            rec.continuation.get(l).copied().unwrap_or(0.0)
        }
    };
    let denom: f64 = (0..len).map(weight).sum();
    if rule.alternatives[j].is_epsilon() {
        // nothing left to continue with: the whole mass escapes
        return Ok(if denom > 0.0 { escape } else { 1.0 });
    }
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok(weight(j) * (1.0 - escape) / denom)
}

impl OrRule {
    pub fn alternative_prob(&self, step: RecursionStep, j: usize) -> Result<f64> {
        eval_alternative_prob(self, step, j)
    }

    /// All alternative probabilities at `step`; invalid specs yield zeros.
    pub fn alternative_probs(&self, step: RecursionStep) -> Vec<f64> {
        (0..self.alternatives.len())
            .map(|j| eval_alternative_prob(self, step, j).unwrap_or(0.0))
            .collect()
    }
}

#[derive(Debug)]
struct CtxNode {
    var: VarId,
    step: RecursionStep,
    alt: usize,
    next: Option<Rc<CtxNode>>,
}

/// Recursion bookkeeping along one derivation path.
///
/// A persistent list of the recursive OR variables entered so far, with the
/// step and alternative chosen at the latest entry. Cloning is O(1).
#[derive(Clone, Debug, Default)]
pub struct RecursionCtx(Option<Rc<CtxNode>>);

impl RecursionCtx {
    pub fn new() -> Self {
        RecursionCtx(None)
    }

    /// Step at which `var` would be expanded next on this path.
    pub fn step_for(&self, var: VarId) -> RecursionStep {
        let mut node = self.0.as_deref();
        while let Some(n) = node {
            if n.var == var {
                return RecursionStep::new(n.step.n_rec + 1, Some(n.alt));
            }
            node = n.next.as_deref();
        }
        RecursionStep::FIRST
    }

    /// Records that `var` was expanded at `step` using alternative `alt`.
    pub fn enter(&self, var: VarId, step: RecursionStep, alt: usize) -> RecursionCtx {
        RecursionCtx(Some(Rc::new(CtxNode {
            var,
            step,
            alt,
            next: self.0.clone(),
        })))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Alternative, Recursion, Symbol, TermId};
    use super::*;

    // group {pour milk, spoon sugar} from the four-sequence coffee fixture:
    // h = [[milk], [spoon, milk], [milk, spoon], [spoon]]
    fn milk_sugar_group() -> OrRule {
        let v = Symbol::V(VarId(0));
        OrRule::recursive(
            vec![
                Alternative::new(vec![Symbol::T(TermId(0)), v], 0.5),
                Alternative::new(vec![Symbol::T(TermId(1)), v], 0.5),
                Alternative::epsilon(0.0),
            ],
            Recursion {
                avg_len: 1.5,
                continuation: vec![1.0, 1.0, 0.0],
                allow_repeat: false,
            },
        )
    }

    #[test]
    fn escape_first_step_is_zero() {
        let g = milk_sugar_group();
        assert_eq!(eval_alternative_prob(&g, RecursionStep::FIRST, 2).unwrap(), 0.0);
    }

    #[test]
    fn escape_later_step_is_inverse_mean_length() {
        let g = milk_sugar_group();
        let p = eval_alternative_prob(&g, RecursionStep::new(2, Some(0)), 2).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn transition_after_milk() {
        let g = milk_sugar_group();
        let step = RecursionStep::new(2, Some(0));
        // 0.5 * (1/3) / 0.5
        let p = eval_alternative_prob(&g, step, 1).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(eval_alternative_prob(&g, step, 0).unwrap(), 0.0);
    }

    #[test]
    fn first_step_values_as_continuation() {
        // continuation equal to the first-step probabilities
        let mut g = milk_sugar_group();
        if let ProbSpec::Recursive(r) = &mut g.spec {
            r.continuation = vec![0.5, 0.5, 0.0];
        }
        let p = eval_alternative_prob(&g, RecursionStep::new(2, Some(0)), 1).unwrap();
        assert!((p - 0.5 * (1.0 / 3.0) / 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_index_and_degenerate_group() {
        let mut g = milk_sugar_group();
        assert!(matches!(
            eval_alternative_prob(&g, RecursionStep::FIRST, 3),
            Err(Error::InvalidAlternative { index: 3, len: 3 })
        ));
        if let ProbSpec::Recursive(r) = &mut g.spec {
            r.avg_len = 0.0;
        }
        assert_eq!(
            eval_alternative_prob(&g, RecursionStep::new(2, Some(1)), 0),
            Err(Error::DegenerateGroup)
        );
        // the first step does not need the mean length
        assert_eq!(eval_alternative_prob(&g, RecursionStep::FIRST, 0), Ok(0.5));
    }

    #[test]
    fn no_continuation_left_escapes_surely() {
        let v = Symbol::V(VarId(0));
        let g = OrRule::recursive(
            vec![
                Alternative::new(vec![Symbol::T(TermId(0)), v], 0.5),
                Alternative::epsilon(0.5),
            ],
            Recursion {
                avg_len: 1.0,
                continuation: vec![0.0, 0.0],
                allow_repeat: false,
            },
        );
        let probs = g.alternative_probs(RecursionStep::new(2, Some(0)));
        assert_eq!(probs, vec![0.0, 1.0]);
    }

    #[test]
    fn ctx_tracks_latest_entry() {
        let ctx = RecursionCtx::new();
        let a = VarId(3);
        assert_eq!(ctx.step_for(a), RecursionStep::FIRST);
        let c1 = ctx.enter(a, RecursionStep::FIRST, 1);
        assert_eq!(c1.step_for(a), RecursionStep::new(2, Some(1)));
        let c2 = c1.enter(VarId(4), RecursionStep::FIRST, 0);
        let c3 = c2.enter(a, c2.step_for(a), 0);
        assert_eq!(c3.step_for(a), RecursionStep::new(3, Some(0)));
        assert_eq!(c3.step_for(VarId(4)), RecursionStep::new(2, Some(0)));
        assert_eq!(ctx.step_for(a), RecursionStep::FIRST);
    }
}
