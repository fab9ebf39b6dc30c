use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grammar, ProbSpec, RecursionCtx, RecursionStep, RuleBody, Symbol, TermId};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_ATTEMPTS: usize = 1000;

/// Top-down sampler. Derivations longer than `max_len` (or containing an
/// immediate action repetition, when `reject_repeats` is set) are rejected
/// and redrawn, up to `max_attempts` times per sample.
#[derive(Clone, Debug)]
pub struct Sampler<'g> {
    grammar: &'g Grammar,
    pub max_len: usize,
    pub max_attempts: usize,
    pub reject_repeats: bool,
}

enum Attempt {
    Done(Vec<TermId>),
    Rejected,
}

impl<'g> Sampler<'g> {
    pub fn new(grammar: &'g Grammar, max_len: usize) -> Self {
        Sampler {
            grammar,
            max_len,
            max_attempts: DEFAULT_SAMPLE_ATTEMPTS,
            reject_repeats: true,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<TermId>> {
        for _ in 0..self.max_attempts {
            if let Attempt::Done(seq) = self.attempt(rng) {
                return Ok(seq);
            }
        }
        Err(Error::SampleBudgetExhausted(self.max_len))
    }

    /// Samples and decodes to token names.
    pub fn sample_tokens<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<String>> {
        self.sample(rng).map(|ids| self.grammar.decode(&ids))
    }

    fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Attempt {
        let g = self.grammar;
        let mut out: Vec<TermId> = Vec::new();
        let mut stack: Vec<(Symbol, RecursionCtx)> = vec![(Symbol::V(g.start()), RecursionCtx::new())];
        // bounds derivations that loop without emitting terminals
        let expansion_budget = (self.max_len + 1) * (g.num_variables() + 1) * 4;
        let mut expansions = 0usize;
        while let Some((sym, ctx)) = stack.pop() {
            match sym {
                Symbol::T(t) => {
                    if self.reject_repeats && out.last() == Some(&t) {
                        return Attempt::Rejected;
                    }
                    out.push(t);
                    if out.len() > self.max_len {
                        return Attempt::Rejected;
                    }
                }
                Symbol::V(v) => {
                    expansions += 1;
                    if expansions > expansion_budget {
                        return Attempt::Rejected;
                    }
                    match g.rule(v) {
                        RuleBody::And(symbols) => {
                            for &s in symbols.iter().rev() {
                                stack.push((s, ctx.clone()));
                            }
                        }
                        RuleBody::Or(or) => {
                            let recursive = matches!(or.spec, ProbSpec::Recursive(_));
                            let step = if recursive { ctx.step_for(v) } else { RecursionStep::FIRST };
                            let probs = or.alternative_probs(step);
                            let Some(j) = pick(&probs, rng) else {
                                return Attempt::Rejected;
                            };
                            let child = if recursive { ctx.enter(v, step, j) } else { ctx };
                            for &s in or.alternatives[j].symbols.iter().rev() {
                                stack.push((s, child.clone()));
                            }
                        }
                    }
                }
            }
        }
        Attempt::Done(out)
    }
}

fn pick<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = probs.iter().filter(|p| **p > 0.0).sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = Some(i);
        if u < p {
            return Some(i);
        }
        u -= p;
    }
    last
}

/// Draws one sequence from `g` with a generator seeded by `seed`.
pub fn sample_sequence(g: &Grammar, seed: u64, max_len: usize) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Sampler::new(g, max_len).sample_tokens(&mut rng)
}

#[cfg(test)]
mod tests {
    use super::super::{Alternative, GrammarBuilder, OrRule, Recursion};
    use super::*;

    #[test]
    fn single_derivation() {
        let mut b = GrammarBuilder::new();
        let s = b.var("S");
        let x = b.t("x");
        b.or(s, vec![Alternative::new(vec![x], 1.0)]);
        let g = b.build(s).unwrap();
        assert_eq!(sample_sequence(&g, 7, 10).unwrap(), vec!["x".to_string()]);
    }

    #[test]
    fn exhausts_budget_when_too_long() {
        let mut b = GrammarBuilder::new();
        let s = b.var("S");
        let x = b.t("x");
        let y = b.t("y");
        b.and(s, vec![x, y, x]);
        let g = b.build(s).unwrap();
        assert_eq!(sample_sequence(&g, 1, 2), Err(Error::SampleBudgetExhausted(2)));
    }

    #[test]
    fn deterministic_given_seed() {
        let mut b = GrammarBuilder::new();
        let s = b.var("S");
        let terms: Vec<_> = ["a", "b", "c"].iter().map(|t| b.t(t)).collect();
        let vs = Symbol::V(s);
        let alts = terms
            .iter()
            .map(|&t| Alternative::new(vec![t, vs], 0.3))
            .chain(std::iter::once(Alternative::epsilon(0.1)))
            .collect();
        b.set_rule(
            s,
            RuleBody::Or(OrRule::recursive(
                alts,
                Recursion {
                    avg_len: 3.0,
                    continuation: vec![1.0, 1.0, 1.0, 0.0],
                    allow_repeat: false,
                },
            )),
        );
        let g = b.build(s).unwrap();
        for seed in 0..20 {
            let a = sample_sequence(&g, seed, 100).unwrap();
            assert_eq!(a, sample_sequence(&g, seed, 100).unwrap());
            assert!(a.windows(2).all(|w| w[0] != w[1]));
        }
    }
}
