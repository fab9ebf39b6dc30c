//! Text format for grammars.
//!
//! ```text
//! %start S
//! %terminals 'take cup' 'pour coffee'
//! S -> VL 'pour coffee'
//! VL -> 'take cup' [0.4] | <eps> [0.6]
//! @recursive first_escape=0 avg_len=1.5 continue=1,1 repeat=no
//! G -> 'a' G [0.5] | 'b' G [0.5] | <eps> [0]
//! ```
//!
//! Rules without brackets are AND rules; OR rules carry `[p]` on every
//! alternative. Quoted tokens are terminals, bare words are variables
//! unless they only appear in `%terminals`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{
    validate_grammar, Alternative, Grammar, GrammarBuilder, OrRule, ProbSpec, Recursion, RuleBody, Symbol,
    NORM_TOLERANCE,
};
use crate::error::{Error, Result};

/// Deviations up to this size are silently renormalized by the loader.
const RENORM_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Arrow,
    Pipe,
    Prob(f64),
    Quoted(String),
    Word(String),
    Eps,
}

struct Lexed {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '|' | '[' | ']' | '#')
}

fn lex(text: &str, line: usize) -> Result<Vec<Lexed>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '|' {
            out.push(Lexed { tok: Tok::Pipe, col });
            i += 1;
        } else if c == '[' {
            let end = chars[i..]
                .iter()
                .position(|&c| c == ']')
                .map(|p| p + i)
                .ok_or_else(|| syntax(line, col, "unterminated probability"))?;
            let body: String = chars[i + 1..end].iter().collect();
            let p: f64 = body
                .trim()
                .parse()
                .map_err(|_| syntax(line, col + 1, format!("invalid probability `{}`", body.trim())))?;
            out.push(Lexed { tok: Tok::Prob(p), col });
            i = end + 1;
        } else if c == '\'' {
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None => return Err(syntax(line, col, "unterminated quoted terminal")),
                    Some('\\') => {
                        match chars.get(j + 1) {
                            Some(&e @ ('\'' | '\\')) => s.push(e),
                            _ => return Err(syntax(line, j + 1, "invalid escape")),
                        }
                        j += 2;
                    }
                    Some('\'') => break,
                    Some(&ch) => {
                        s.push(ch);
                        j += 1;
                    }
                }
            }
            if s.is_empty() {
                return Err(syntax(line, col, "empty terminal name"));
            }
            out.push(Lexed {
                tok: Tok::Quoted(s),
                col,
            });
            i = j + 1;
        } else if c == ']' {
            return Err(syntax(line, col, "unexpected `]`"));
        } else {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let w: String = chars[start..i].iter().collect();
            let tok = match w.as_str() {
                "->" => Tok::Arrow,
                "<eps>" | "ε" => Tok::Eps,
                _ => Tok::Word(w),
            };
            out.push(Lexed { tok, col });
        }
    }
    Ok(out)
}

#[derive(Default)]
struct RecAnnot {
    first_escape: Option<f64>,
    avg_len: Option<f64>,
    continuation: Option<Vec<f64>>,
    allow_repeat: bool,
}

fn parse_annotation(rest: &str, line: usize, offset: usize) -> Result<RecAnnot> {
    let mut a = RecAnnot::default();
    let mut col = offset;
    for part in rest.split_whitespace() {
        let here = rest.find(part).map(|p| p + offset).unwrap_or(col);
        col = here;
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| syntax(line, here, format!("expected key=value, found `{part}`")))?;
        let num = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| syntax(line, here, format!("invalid number `{v}` for `{key}`")))
        };
        match key {
            "first_escape" => a.first_escape = Some(num(value)?),
            "avg_len" => a.avg_len = Some(num(value)?),
            "continue" => {
                let ws = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(num).collect::<Result<Vec<_>>>()?
                };
                a.continuation = Some(ws);
            }
            "repeat" => {
                a.allow_repeat = match value {
                    "yes" => true,
                    "no" => false,
                    _ => return Err(syntax(line, here, "repeat must be yes or no")),
                }
            }
            _ => return Err(syntax(line, here, format!("unknown annotation key `{key}`"))),
        }
    }
    if a.avg_len.is_none() {
        return Err(syntax(line, offset, "@recursive requires avg_len"));
    }
    Ok(a)
}

struct RawRule {
    line: usize,
    head: String,
    head_col: usize,
    body: Vec<Lexed>,
    annot: Option<RecAnnot>,
}

/// Parses grammar text without checking probabilistic invariants; combine
/// with [`validate_grammar`] or use [`load_grammar`].
pub fn parse_grammar(text: &str) -> Result<Grammar> {
    let mut start: Option<(String, usize, usize)> = None;
    let mut declared_terms: Vec<String> = Vec::new();
    let mut raw: Vec<RawRule> = Vec::new();
    let mut pending: Option<(RecAnnot, usize)> = None;

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = full.trim_start();
        let indent = full.len() - trimmed.len();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("%start") {
            let toks = lex(rest, line)?;
            match toks.as_slice() {
                [Lexed { tok: Tok::Word(w), col }] => start = Some((w.clone(), line, col + indent + 6)),
                _ => return Err(syntax(line, indent + 1, "%start expects one variable name")),
            }
        } else if let Some(rest) = trimmed.strip_prefix("%terminals") {
            for t in lex(rest, line)? {
                match t.tok {
                    Tok::Quoted(s) | Tok::Word(s) => declared_terms.push(s),
                    _ => return Err(syntax(line, t.col + indent + 10, "expected terminal name")),
                }
            }
        } else if let Some(rest) = trimmed.strip_prefix("@recursive") {
            if pending.is_some() {
                return Err(syntax(line, indent + 1, "two @recursive annotations in a row"));
            }
            pending = Some((parse_annotation(rest, line, indent + 11)?, line));
        } else if trimmed.starts_with('%') {
            return Err(syntax(line, indent + 1, "unknown directive"));
        } else {
            let toks = lex(full, line)?;
            let mut it = toks.into_iter();
            let (head, head_col) = match it.next() {
                Some(Lexed {
                    tok: Tok::Word(w),
                    col,
                }) => (w, col),
                Some(t) => return Err(syntax(line, t.col, "expected rule head")),
                None => continue,
            };
            match it.next() {
                Some(Lexed { tok: Tok::Arrow, .. }) => {}
                Some(t) => return Err(syntax(line, t.col, "expected `->`")),
                None => return Err(syntax(line, full.len() + 1, "expected `->`")),
            }
            raw.push(RawRule {
                line,
                head,
                head_col,
                body: it.collect(),
                annot: pending.take().map(|(a, _)| a),
            });
        }
    }
    if let Some((_, l)) = pending {
        return Err(syntax(l, 1, "@recursive annotation without a following rule"));
    }
    if raw.is_empty() {
        return Err(Error::InvalidGrammar("no rules".into()));
    }

    let mut b = GrammarBuilder::new();
    let mut heads: HashMap<String, usize> = HashMap::new();
    for r in &raw {
        if heads.insert(r.head.clone(), r.line).is_some() {
            return Err(syntax(r.line, r.head_col, format!("duplicate rule for `{}`", r.head)));
        }
        b.var(&r.head);
    }
    for t in &declared_terms {
        b.terminal(t);
    }
    let declared: std::collections::HashSet<&str> = declared_terms.iter().map(String::as_str).collect();

    for r in raw {
        let head = b.var(&r.head);
        let body = build_body(&mut b, &heads, &declared, r.body, r.line)?;
        let body = match (body, r.annot) {
            (body, None) => body,
            (RuleBody::Or(or), Some(annot)) => RuleBody::Or(attach_recursion(or, annot, r.line)?),
            (RuleBody::And(_), Some(_)) => {
                return Err(syntax(r.line, r.head_col, "@recursive applies only to OR rules"));
            }
        };
        b.set_rule(head, body);
    }

    let start = match start {
        Some((name, line, col)) => {
            if !heads.contains_key(&name) {
                return Err(syntax(line, col, format!("start variable `{name}` has no rule")));
            }
            b.var(&name)
        }
        None => super::VarId(0),
    };
    b.build(start)
}

fn build_body(
    b: &mut GrammarBuilder,
    heads: &HashMap<String, usize>,
    declared: &std::collections::HashSet<&str>,
    toks: Vec<Lexed>,
    line: usize,
) -> Result<RuleBody> {
    let mut alts: Vec<(Vec<Symbol>, Option<f64>, usize)> = vec![(Vec::new(), None, 1)];
    let mut saw_eps = false;
    for t in toks {
        let cur = alts.last_mut().expect("non-empty");
        if cur.1.is_some() && t.tok != Tok::Pipe {
            return Err(syntax(line, t.col, "symbols after probability"));
        }
        match t.tok {
            Tok::Pipe => {
                alts.push((Vec::new(), None, t.col));
                saw_eps = false;
            }
            Tok::Prob(p) => cur.1 = Some(p),
            Tok::Eps => {
                if !cur.0.is_empty() {
                    return Err(syntax(line, t.col, "ε must be the only symbol of its alternative"));
                }
                saw_eps = true;
            }
            Tok::Quoted(s) => {
                if saw_eps {
                    return Err(syntax(line, t.col, "ε must be the only symbol of its alternative"));
                }
                cur.0.push(b.t(&s));
            }
            Tok::Word(w) => {
                if saw_eps {
                    return Err(syntax(line, t.col, "ε must be the only symbol of its alternative"));
                }
                if heads.contains_key(&w) {
                    cur.0.push(b.v(&w));
                } else if declared.contains(w.as_str()) {
                    cur.0.push(b.t(&w));
                } else {
                    return Err(Error::UndeclaredSymbol(w));
                }
            }
            Tok::Arrow => return Err(syntax(line, t.col, "unexpected `->`")),
        }
    }
    let with_prob = alts.iter().filter(|a| a.1.is_some()).count();
    if with_prob == 0 {
        if alts.len() > 1 {
            return Err(syntax(line, alts[1].2, "OR alternatives need probabilities"));
        }
        let (symbols, _, _) = alts.pop().expect("one alternative");
        return Ok(RuleBody::And(symbols));
    }
    if let Some(a) = alts.iter().find(|a| a.1.is_none()) {
        return Err(syntax(line, a.2, "alternative without probability"));
    }
    let mut alternatives: Vec<Alternative> = alts
        .into_iter()
        .map(|(symbols, p, _)| Alternative::new(symbols, p.expect("checked")))
        .collect();
    renormalize(&mut alternatives);
    Ok(RuleBody::Or(OrRule::new(alternatives)))
}

fn renormalize(alts: &mut [Alternative]) {
    let sum: f64 = alts.iter().map(|a| a.prob).sum();
    let dev = (sum - 1.0).abs();
    if dev > NORM_TOLERANCE && dev <= RENORM_LIMIT {
        for a in alts.iter_mut() {
            a.prob /= sum;
        }
    }
}

fn attach_recursion(or: OrRule, annot: RecAnnot, line: usize) -> Result<OrRule> {
    let eps = or.epsilon_index();
    if let (Some(fe), Some(i)) = (annot.first_escape, eps) {
        if (fe - or.alternatives[i].prob).abs() > RENORM_LIMIT {
            return Err(syntax(line, 1, "first_escape disagrees with the ε alternative"));
        }
    }
    let n_actions = or.alternatives.len() - usize::from(eps.is_some());
    let continuation = match annot.continuation {
        Some(ws) => {
            if ws.len() != n_actions {
                return Err(syntax(
                    line,
                    1,
                    format!("continue lists {} weights for {} alternatives", ws.len(), n_actions),
                ));
            }
            let mut it = ws.into_iter();
            or.alternatives
                .iter()
                .map(|a| if a.is_epsilon() { 0.0 } else { it.next().expect("length checked") })
                .collect()
        }
        None => or
            .alternatives
            .iter()
            .map(|a| if a.is_epsilon() { 0.0 } else { a.prob })
            .collect(),
    };
    Ok(OrRule::recursive(
        or.alternatives,
        Recursion {
            avg_len: annot.avg_len.expect("checked"),
            continuation,
            allow_repeat: annot.allow_repeat,
        },
    ))
}

/// Parses and validates; any invariant violation is an error.
pub fn load_grammar(text: &str) -> Result<Grammar> {
    let g = parse_grammar(text)?;
    let report = validate_grammar(&g);
    if report.is_ok() {
        Ok(g)
    } else {
        Err(Error::InvalidGrammar(report.to_string()))
    }
}

fn quote(name: &str) -> String {
    let mut s = String::with_capacity(name.len() + 2);
    s.push('\'');
    for c in name.chars() {
        if c == '\'' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('\'');
    s
}

fn write_symbols(out: &mut String, g: &Grammar, symbols: &[Symbol]) {
    if symbols.is_empty() {
        out.push_str(" <eps>");
    }
    for &s in symbols {
        out.push(' ');
        match s {
            Symbol::T(t) => out.push_str(&quote(g.term_name(t))),
            Symbol::V(v) => out.push_str(g.var_name(v)),
        }
    }
}

/// Canonical text form: byte-identical for equal grammars.
pub fn save_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "%start {}", g.var_name(g.start()));
    out.push_str("%terminals");
    for t in g.terminals() {
        out.push(' ');
        out.push_str(&quote(t));
    }
    out.push('\n');
    for (head, body) in g.rules() {
        match body {
            RuleBody::And(symbols) => {
                out.push_str(g.var_name(head));
                out.push_str(" ->");
                write_symbols(&mut out, g, symbols);
            }
            RuleBody::Or(or) => {
                if let ProbSpec::Recursive(rec) = &or.spec {
                    let weights: Vec<String> = or
                        .alternatives
                        .iter()
                        .zip(&rec.continuation)
                        .filter(|(a, _)| !a.is_epsilon())
                        .map(|(_, w)| format!("{w}"))
                        .collect();
                    let _ = writeln!(
                        out,
                        "@recursive first_escape={} avg_len={} continue={} repeat={}",
                        or.first_escape(),
                        rec.avg_len,
                        weights.join(","),
                        if rec.allow_repeat { "yes" } else { "no" }
                    );
                }
                out.push_str(g.var_name(head));
                out.push_str(" ->");
                for (i, alt) in or.alternatives.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" |");
                    }
                    write_symbols(&mut out, g, &alt.symbols);
                    let _ = write!(out, " [{}]", alt.prob);
                }
            }
        }
        out.push('\n');
    }
    out
}
