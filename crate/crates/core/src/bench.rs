//! Precision/recall benchmark of induction algorithms on synthetic grammars.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::{induce_flat, induce_right_regular, ActivityWeighting, NGramConfig};
use crate::corpus::{ActionSequence, Corpus};
use crate::error::{Error, Result};
use crate::grammar::{Grammar, Sampler};
use crate::kari::{induce_with, KariOptions};
use crate::parser::accepts;
use crate::synth::{generate_synthetic_grammar, SynthConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    Kari(KariOptions),
    Flat,
    RightRegular(NGramConfig),
    /// The generating grammar itself.
    Oracle,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Kari(_) => "kari",
            Algorithm::Flat => "flat",
            Algorithm::RightRegular(_) => "right-regular",
            Algorithm::Oracle => "oracle",
        }
    }

    /// Parses an algorithm name with default settings. KARI uses
    /// `n_key` key actions; the right-regular baseline conditions on the
    /// previous two actions.
    pub fn from_name(name: &str, n_key: usize) -> Result<Self> {
        match name {
            "kari" => Ok(Algorithm::Kari(KariOptions {
                n_key,
                ..KariOptions::default()
            })),
            "flat" => Ok(Algorithm::Flat),
            "right-regular" | "rr" => Ok(Algorithm::RightRegular(NGramConfig {
                order: Some(2),
                smoothing: 0.0,
            })),
            "oracle" => Ok(Algorithm::Oracle),
            _ => Err(Error::InvalidConfig(format!("unknown algorithm `{name}`"))),
        }
    }

    pub fn induce(&self, seen: &Corpus, truth: &Grammar) -> Result<Grammar> {
        match self {
            Algorithm::Kari(opts) => induce_with(seen, opts).map(|(g, _)| g),
            Algorithm::Flat => induce_flat(&[("seen", seen)], ActivityWeighting::Counts),
            Algorithm::RightRegular(cfg) => induce_right_regular(seen, cfg),
            Algorithm::Oracle => Ok(truth.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrammarScore {
    pub precision: f64,
    pub recall: f64,
    /// Error message when induction failed.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub algorithm: String,
    pub config: SynthConfig,
    pub per_grammar: Vec<GrammarScore>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// `confusion[i][j]`: share of grammar `j`'s unseen sequences accepted by
    /// the grammar induced for `i`.
    pub confusion: Vec<Vec<f64>>,
}

/// Seen/unseen split of the sequences sampled from one synthetic grammar.
#[derive(Clone, Debug)]
pub struct SyntheticSet {
    pub grammar: Grammar,
    pub seen: Vec<ActionSequence>,
    pub unseen: Vec<ActionSequence>,
}

/// Generates every grammar of the benchmark with its seen and unseen sets.
/// Grammar `i` draws from stream `i` of a generator seeded by `cfg.seed`.
pub fn synthetic_sets(cfg: &SynthConfig) -> Result<Vec<SyntheticSet>> {
    cfg.validate()?;
    let n_seen = ((cfg.seq_per_grammar as f64 * cfg.seen_fraction).round() as usize).clamp(1, cfg.seq_per_grammar - 1);
    (0..cfg.n_grammars)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let grammar = generate_synthetic_grammar(cfg, i, &mut rng)?;
            let sampler = Sampler::new(&grammar, cfg.max_len());
            let mut all = (0..cfg.seq_per_grammar)
                .map(|_| sampler.sample_tokens(&mut rng))
                .collect::<Result<Vec<_>>>()?;
            all.shuffle(&mut rng);
            let unseen = all.split_off(n_seen);
            Ok(SyntheticSet {
                grammar,
                seen: all,
                unseen,
            })
        })
        .collect()
}

/// Induces a grammar from each seen set and tests membership of every
/// grammar's unseen sequences.
pub fn run_grammar_eval(cfg: &SynthConfig, algo: &Algorithm) -> Result<EvalReport> {
    let sets = synthetic_sets(cfg)?;
    Ok(evaluate_sets(cfg, &sets, algo))
}

pub fn evaluate_sets(cfg: &SynthConfig, sets: &[SyntheticSet], algo: &Algorithm) -> EvalReport {
    let n = sets.len();
    let induced: Vec<Result<Grammar>> = sets
        .iter()
        .map(|s| Corpus::new(None, s.seen.clone()).and_then(|c| algo.induce(&c, &s.grammar)))
        .collect();

    let rows: Vec<(Vec<f64>, Vec<usize>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = induced
            .iter()
            .map(|g| {
                scope.spawn(move || match g {
                    Ok(g) => accepted_counts(g, sets),
                    Err(_) => (vec![0.0; n], vec![0; n]),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("membership worker panicked")).collect()
    });

    let mut per_grammar = Vec::with_capacity(n);
    let mut confusion = Vec::with_capacity(n);
    for (i, ((fractions, counts), g)) in rows.into_iter().zip(&induced).enumerate() {
        let tp = counts[i];
        let fp: usize = counts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c).sum();
        let positives = sets[i].unseen.len();
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if positives == 0 { 0.0 } else { tp as f64 / positives as f64 };
        per_grammar.push(GrammarScore {
            precision,
            recall,
            failure: g.as_ref().err().map(|e| e.to_string()),
        });
        confusion.push(fractions);
    }
    let mean = |f: fn(&GrammarScore) -> f64| per_grammar.iter().map(f).sum::<f64>() / n.max(1) as f64;
    EvalReport {
        algorithm: algo.name().to_string(),
        config: cfg.clone(),
        macro_precision: mean(|s| s.precision),
        macro_recall: mean(|s| s.recall),
        per_grammar,
        confusion,
    }
}

fn accepted_counts(g: &Grammar, sets: &[SyntheticSet]) -> (Vec<f64>, Vec<usize>) {
    let mut memo: HashMap<&[String], bool> = HashMap::new();
    let mut fractions = Vec::with_capacity(sets.len());
    let mut counts = Vec::with_capacity(sets.len());
    for s in sets {
        let c = s
            .unseen
            .iter()
            .filter(|seq| *memo.entry(seq.as_slice()).or_insert_with(|| accepts(g, seq)))
            .count();
        counts.push(c);
        fractions.push(if s.unseen.is_empty() { 0.0 } else { c as f64 / s.unseen.len() as f64 });
    }
    (fractions, counts)
}

impl EvalReport {
    /// One row per grammar: index, precision, recall, failure message.
    pub fn per_grammar_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["grammar", "precision", "recall", "failure"])?;
        for (i, s) in self.per_grammar.iter().enumerate() {
            w.write_record([
                i.to_string(),
                format!("{:.6}", s.precision),
                format!("{:.6}", s.recall),
                s.failure.clone().unwrap_or_default(),
            ])?;
        }
        finish(w)
    }

    /// Confusion matrix as a square grid, rows are induced grammars.
    pub fn confusion_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let n = self.confusion.len();
        let header: Vec<String> = std::iter::once("induced".to_string())
            .chain((0..n).map(|j| format!("g{j}")))
            .collect();
        w.write_record(&header)?;
        for (i, row) in self.confusion.iter().enumerate() {
            let rec: Vec<String> = std::iter::once(format!("g{i}"))
                .chain(row.iter().map(|x| format!("{x:.6}")))
                .collect();
            w.write_record(&rec)?;
        }
        finish(w)
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(
            f,
            "# algorithm={} grammars={} variables={} terminals={} type={} keys={} sequences={} seen={} optional={} free_order={} seed={}",
            self.algorithm,
            c.n_grammars,
            c.n_variables,
            c.n_terminals,
            c.grammar_type,
            c.n_key_terminals,
            c.seq_per_grammar,
            c.seen_fraction,
            c.optional_prob,
            c.free_order_prob,
            c.seed
        )?;
        let failures = self.per_grammar.iter().filter(|s| s.failure.is_some()).count();
        writeln!(f, "macro precision {:.4}", self.macro_precision)?;
        writeln!(f, "macro recall {:.4}", self.macro_recall)?;
        write!(f, "induction failures {failures}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            n_grammars: 4,
            seq_per_grammar: 20,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn oracle_has_full_recall() {
        let r = run_grammar_eval(&small(), &Algorithm::Oracle).unwrap();
        assert_eq!(r.macro_recall, 1.0);
        for (i, s) in r.per_grammar.iter().enumerate() {
            assert_eq!(s.recall, r.confusion[i][i]);
        }
    }

    #[test]
    fn report_is_deterministic_and_bounded() {
        let algo = Algorithm::from_name("kari", 3).unwrap();
        let a = run_grammar_eval(&small(), &algo).unwrap();
        let b = run_grammar_eval(&small(), &algo).unwrap();
        assert_eq!(a, b);
        assert!(a.confusion.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
        assert_eq!(a.confusion_csv().unwrap(), b.confusion_csv().unwrap());
    }
}
