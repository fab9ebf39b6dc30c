//! Key-action based recursive induction.
//!
//! Every training sequence is split around its key actions into a left,
//! middle and right part. The left and right parts become sequences of
//! recursive action groups; the middle becomes a choice over the observed
//! key-action orders, with the actions between keys induced the same way.

mod groups;
mod keys;
mod perms;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::grammar::{Alternative, Grammar, GrammarBuilder, OrRule, Recursion, RuleBody, Symbol, VarId};

pub use groups::{build_action_groups, ActionGroupSequence};
pub use keys::{select_key_actions, split_sequence, KeySelection};
pub use perms::{build_permutation_table, PermPolicy, PermutationTable, MAX_ENUMERATED_KEYS};

/// Boundary token lifted into the start rule when it brackets every sequence.
pub const SILENCE: &str = "SIL";

#[derive(Clone, Debug, PartialEq)]
pub struct KariOptions {
    pub n_key: usize,
    pub perms: PermPolicy,
    pub lift_silence: bool,
}

impl Default for KariOptions {
    fn default() -> Self {
        KariOptions {
            n_key: 4,
            perms: PermPolicy::Observed,
            lift_silence: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KariReport {
    pub keys: Vec<String>,
    pub key_shortfall: usize,
    /// Sequences skipped because they miss a key action.
    pub skipped: usize,
    pub irregular_middles: usize,
    pub merged_cycles: usize,
    pub silence_lifted: bool,
}

/// Induces a grammar with `n_key` key actions and default options.
pub fn induce(c: &Corpus, n_key: usize) -> Result<Grammar> {
    let opts = KariOptions {
        n_key,
        ..KariOptions::default()
    };
    induce_with(c, &opts).map(|(g, _)| g)
}

pub fn induce_with(c: &Corpus, opts: &KariOptions) -> Result<(Grammar, KariReport)> {
    if c.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut report = KariReport::default();
    let lift = opts.lift_silence
        && c.sequences.iter().all(|s| {
            s.len() > 2 && s.first().map(String::as_str) == Some(SILENCE) && s.last().map(String::as_str) == Some(SILENCE)
        });
    let stripped;
    let corpus = if lift {
        report.silence_lifted = true;
        stripped = Corpus {
            activity: c.activity.clone(),
            sequences: c.sequences.iter().map(|s| s[1..s.len() - 1].to_vec()).collect(),
        };
        &stripped
    } else {
        c
    };

    let sel = select_key_actions(corpus, opts.n_key)?;
    report.keys = sel.keys.clone();
    report.key_shortfall = sel.shortfall;
    if sel.shortfall > 0 {
        log::info!("only {} universal key actions available", sel.keys.len());
    }
    let (mut left, mut middle, mut right) = (Vec::new(), Vec::new(), Vec::new());
    for s in &corpus.sequences {
        match split_sequence(s, &sel.keys) {
            Ok((l, m, r)) => {
                left.push(l);
                middle.push(m);
                right.push(r);
            }
            Err(e) => {
                log::warn!("skipping sequence: {e}");
                report.skipped += 1;
            }
        }
    }
    if middle.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut b = GrammarBuilder::new();
    for t in corpus.alphabet() {
        b.terminal(&t);
    }
    if lift {
        b.terminal(SILENCE);
    }
    let start_name = b.fresh_name("S");
    let start = b.var(&start_name);
    let vl = induce_part(&mut b, "VL", &left, &mut report);
    let vm = induce_middle(&mut b, &middle, &sel.keys, opts.perms, &mut report)?;
    let vr = induce_part(&mut b, "VR", &right, &mut report);

    let mut body = Vec::new();
    if lift {
        body.push(b.t(SILENCE));
    }
    body.extend(vl.map(Symbol::V));
    body.push(Symbol::V(vm));
    body.extend(vr.map(Symbol::V));
    if lift {
        body.push(b.t(SILENCE));
    }
    b.and(start, body);
    Ok((b.build(start)?, report))
}

/// Emits the rules of one part and returns its variable, or `None` when
/// the part is always empty.
fn induce_part(b: &mut GrammarBuilder, base: &str, part: &[Vec<String>], report: &mut KariReport) -> Option<VarId> {
    let ag = build_action_groups(part);
    report.merged_cycles += ag.merged_cycles;
    match ag.groups.len() {
        0 => None,
        1 => Some(group_rule(b, base, &ag.groups[0], &ag.h_lists[0])),
        _ => {
            let name = b.fresh_name(base);
            let head = b.var(&name);
            let body = ag
                .groups
                .iter()
                .zip(&ag.h_lists)
                .enumerate()
                .map(|(i, (grp, h))| Symbol::V(group_rule(b, &format!("{name}_{}", i + 1), grp, h)))
                .collect();
            b.and(head, body);
            Some(head)
        }
    }
}

/// The rule `V -> d_1 V | ... | d_k V | ε` of one action group.
fn group_rule(b: &mut GrammarBuilder, name: &str, group: &[String], h: &[Vec<String>]) -> VarId {
    let name = b.fresh_name(name);
    let head = b.var(&name);
    let total = h.len() as f64;
    let empties = h.iter().filter(|s| s.is_empty()).count();
    let lengths: Vec<usize> = h.iter().map(Vec::len).filter(|&l| l > 0).collect();
    let avg_len = lengths.iter().sum::<usize>() as f64 / lengths.len().max(1) as f64;
    let first = |a: &String| h.iter().filter(|s| s.first() == Some(a)).count() as f64;
    let escape = empties as f64 / total;

    if lengths.iter().all(|&l| l == 1) {
        let mut alts: Vec<Alternative> = group
            .iter()
            .filter(|a| first(a) > 0.0)
            .map(|a| Alternative::new(vec![b.t(a)], first(a) / total))
            .collect();
        if empties > 0 {
            alts.push(Alternative::epsilon(escape));
        }
        b.or(head, alts);
        return head;
    }

    let mut alts = Vec::with_capacity(group.len() + 1);
    let mut continuation = Vec::with_capacity(group.len() + 1);
    for a in group {
        alts.push(Alternative::new(vec![b.t(a), Symbol::V(head)], first(a) / total));
        continuation.push(h.iter().map(|s| s.iter().skip(1).filter(|x| *x == a).count()).sum::<usize>() as f64);
    }
    alts.push(Alternative::epsilon(escape));
    continuation.push(0.0);
    b.set_rule(
        head,
        RuleBody::Or(OrRule::recursive(
            alts,
            Recursion {
                avg_len,
                continuation,
                allow_repeat: false,
            },
        )),
    );
    head
}

fn induce_middle(
    b: &mut GrammarBuilder,
    middles: &[Vec<String>],
    keys: &[String],
    policy: PermPolicy,
    report: &mut KariReport,
) -> Result<VarId> {
    let table = build_permutation_table(middles, keys, policy);
    report.irregular_middles = table.irregular;
    if table.perms.is_empty() {
        return Err(Error::InvalidGrammar(
            "no middle part splits into whole key-action orders".into(),
        ));
    }
    let name = b.fresh_name("VM");
    let head = b.var(&name);
    let repeats = table.max_blocks > 1;
    let mut bodies = Vec::with_capacity(table.perms.len());
    for (i, perm) in table.perms.iter().enumerate() {
        let mut body = Vec::new();
        for (j, key) in perm.iter().enumerate() {
            body.push(b.t(key));
            let last = j + 1 == perm.len();
            if last && !repeats {
                continue;
            }
            let gap = &table.gap_corpora[i][j];
            if let Some(v) = induce_part(b, &format!("{name}_{}_{}", i + 1, j + 1), gap, report) {
                body.push(Symbol::V(v));
            }
        }
        bodies.push(body);
    }
    let total: f64 = table.counts.iter().sum::<f64>() / (1.0 - table.first_escape);

    if !repeats {
        let alts = bodies
            .into_iter()
            .zip(&table.counts)
            .map(|(body, c)| Alternative::new(body, c / total))
            .collect();
        b.or(head, alts);
        return Ok(head);
    }

    let mut alts = Vec::with_capacity(bodies.len() + 1);
    for (i, mut body) in bodies.into_iter().enumerate() {
        body.push(Symbol::V(head));
        let v = b.var(&b.fresh_name(&format!("{name}_{}", i + 1)));
        b.and(v, body);
        alts.push(Alternative::new(vec![Symbol::V(v)], table.counts[i] / total));
    }
    alts.push(Alternative::epsilon(table.first_escape));
    let mut continuation = table.repeat_counts.clone();
    continuation.push(0.0);
    b.set_rule(
        head,
        RuleBody::Or(OrRule::recursive(
            alts,
            Recursion {
                avg_len: table.avg_blocks,
                continuation,
                allow_repeat: true,
            },
        )),
    );
    Ok(head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{validate_grammar, ProbSpec, RecursionStep};
    use crate::parser::accepts;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn coffee() -> Corpus {
        Corpus::from_slices(&[
            &["take_cup", "pour_coffee", "pour_milk"],
            &["pour_coffee", "spoon_sugar", "pour_milk"],
            &["take_cup", "pour_coffee", "pour_milk", "spoon_sugar", "stir_coffee"],
            &["pour_coffee", "spoon_sugar", "stir_coffee"],
        ])
    }

    fn or_rule<'g>(g: &'g Grammar, name: &str) -> &'g OrRule {
        match g.rule(g.var_id(name).unwrap_or_else(|| panic!("no {name}: {g}"))) {
            RuleBody::Or(or) => or,
            RuleBody::And(_) => panic!("{name} is an AND rule"),
        }
    }

    #[test]
    fn coffee_group_statistics() {
        let g = induce(&coffee(), 1).unwrap();
        assert!(validate_grammar(&g).is_ok(), "{}", validate_grammar(&g));
        let r1 = or_rule(&g, "VR_1");
        let ProbSpec::Recursive(rec) = &r1.spec else { panic!("VR_1 must recurse") };
        assert_eq!(rec.avg_len, 1.5);
        let probs: Vec<f64> = r1.alternatives.iter().map(|a| a.prob).collect();
        assert_eq!(probs, vec![0.5, 0.5, 0.0]);
        assert!((r1.alternative_prob(RecursionStep::new(2, Some(0)), 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let r2 = or_rule(&g, "VR_2");
        let probs: Vec<f64> = r2.alternatives.iter().map(|a| a.prob).collect();
        assert_eq!(probs, vec![0.5, 0.5]);
        assert_eq!(or_rule(&g, "VM").alternatives.len(), 1);
    }

    #[test]
    fn reconstructs_training_and_recombines() {
        let c = coffee();
        let g = induce(&c, 1).unwrap();
        for s in &c.sequences {
            assert!(accepts(&g, s), "{s:?}");
        }
        assert!(accepts(&g, &v(&["take_cup", "pour_coffee", "spoon_sugar", "pour_milk", "stir_coffee"])));
        assert!(!accepts(&g, &v(&["pour_coffee", "stir_coffee", "spoon_sugar"])));
    }

    #[test]
    fn silence_is_lifted() {
        let c = Corpus::from_slices(&[&["SIL", "a", "k", "SIL"], &["SIL", "k", "b", "SIL"]]);
        let (g, report) = induce_with(&c, &KariOptions { n_key: 1, ..Default::default() }).unwrap();
        assert!(report.silence_lifted);
        match g.rule(g.start()) {
            RuleBody::And(body) => {
                assert_eq!(g.symbol_name(body[0]), "SIL");
                assert_eq!(g.symbol_name(*body.last().unwrap()), "SIL");
            }
            _ => panic!("start must be an AND rule"),
        }
        for s in &c.sequences {
            assert!(accepts(&g, s));
        }
    }

    #[test]
    fn repeated_key_blocks() {
        let c = Corpus::from_slices(&[&["a", "b", "x", "a", "b"], &["b", "a"], &["a", "y", "b"]]);
        let g = induce(&c, 2).unwrap();
        assert!(validate_grammar(&g).is_ok(), "{}", validate_grammar(&g));
        for s in &c.sequences {
            assert!(accepts(&g, s), "{s:?}\n{g}");
        }
        assert!(accepts(&g, &v(&["a", "y", "b", "x", "a", "y", "b"])));
        assert!(!accepts(&g, &v(&["b", "a", "x", "a", "b"])));
    }
}
