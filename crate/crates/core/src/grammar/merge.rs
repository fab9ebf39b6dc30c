use super::{Alternative, Grammar, GrammarBuilder, OrRule, RuleBody, Symbol};
use crate::error::{Error, Result};

/// Unions several grammars under a new start OR rule whose alternative
/// probabilities are the normalized weights. Variables of grammar `i` are
/// renamed `g{i}::<name>`; terminals are shared by name.
pub fn merge_grammars(gs: &[(&Grammar, f64)]) -> Result<Grammar> {
    if gs.is_empty() {
        return Err(Error::EmptyMerge);
    }
    if gs.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidConfig("merge weights must be finite and non-negative".into()));
    }
    let total: f64 = gs.iter().map(|(_, w)| w).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidConfig("merge weights sum to zero".into()));
    }

    // namespaced variables contain `::`, so only terminals can clash
    let mut start_name = String::from("S");
    while gs.iter().any(|(g, _)| g.term_id(&start_name).is_some()) {
        start_name.push('\'');
    }
    let mut b = GrammarBuilder::new();
    let start = b.var(&start_name);
    fill(&mut b, gs, total, start);
    b.build(start)
}

fn fill(b: &mut GrammarBuilder, gs: &[(&Grammar, f64)], total: f64, start: super::VarId) {
    let mut alts = Vec::with_capacity(gs.len());
    for (i, (g, w)) in gs.iter().enumerate() {
        let map = |b: &mut GrammarBuilder, s: Symbol| match s {
            Symbol::T(t) => b.t(g.term_name(t)),
            Symbol::V(v) => b.v(&format!("g{i}::{}", g.var_name(v))),
        };
        for (head, body) in g.rules() {
            let head = b.var(&format!("g{i}::{}", g.var_name(head)));
            let body = match body {
                RuleBody::And(symbols) => RuleBody::And(symbols.iter().map(|&s| map(b, s)).collect()),
                RuleBody::Or(or) => RuleBody::Or(OrRule {
                    alternatives: or
                        .alternatives
                        .iter()
                        .map(|a| Alternative::new(a.symbols.iter().map(|&s| map(b, s)).collect(), a.prob))
                        .collect(),
                    spec: or.spec.clone(),
                }),
            };
            b.set_rule(head, body);
        }
        let root = b.v(&format!("g{i}::{}", g.var_name(g.start())));
        alts.push(Alternative::new(vec![root], w / total));
    }
    b.or(start, alts);
}

#[cfg(test)]
mod tests {
    use super::super::validate_grammar;
    use super::*;

    fn ab() -> Grammar {
        let mut b = GrammarBuilder::new();
        let s = b.var("S");
        let a = b.t("a");
        let x = b.t("b");
        b.and(s, vec![a, x]);
        b.build(s).unwrap()
    }

    #[test]
    fn empty_list_is_an_error() {
        assert_eq!(merge_grammars(&[]), Err(Error::EmptyMerge));
    }

    #[test]
    fn weights_are_normalized() {
        let g = ab();
        let m = merge_grammars(&[(&g, 1.0), (&g, 3.0)]).unwrap();
        assert!(validate_grammar(&m).is_ok());
        match m.rule(m.start()) {
            RuleBody::Or(or) => {
                let ps: Vec<f64> = or.alternatives.iter().map(|a| a.prob).collect();
                assert_eq!(ps, vec![0.25, 0.75]);
            }
            _ => panic!("start must be an OR rule"),
        }
        assert_eq!(m.num_terminals(), 2);
        assert!(m.var_id("g1::S").is_some());
    }

    #[test]
    fn start_name_avoids_collision() {
        let mut b = GrammarBuilder::new();
        let s = b.var("A");
        let t = b.t("S");
        b.and(s, vec![t]);
        let g = b.build(s).unwrap();
        let m = merge_grammars(&[(&g, 1.0)]).unwrap();
        assert_eq!(m.var_name(m.start()), "S'");
        assert!(validate_grammar(&m).is_ok());
    }
}
