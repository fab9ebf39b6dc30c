use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use actgram::baseline::{induce_flat, induce_right_regular, ActivityWeighting, NGramConfig};
use actgram::bench::{run_grammar_eval, Algorithm};
use actgram::corpus::Corpus;
use actgram::frames::FrameProbMatrix;
use actgram::grammar::{load_grammar, merge_grammars, save_grammar, Grammar};
use actgram::kari::{induce_with, KariOptions, PermPolicy};
use actgram::metrics::SegmentationScores;
use actgram::parser::{parse, ParseOptions, QueuePolicy};
use actgram::refine::{refine_dataset, FixtureConfig, RefineFixture, RefineOptions};
use actgram::segment::{labels_to_text, optimal_lengths, parse_labels, upsample_labels};
use actgram::synth::{GrammarType, SynthConfig};

use crate::config::Settings;
use crate::output::{emit, write_atomic, StagedDir};
use crate::{Cli, Command, EvalArgs, InduceArgs, MetricsArgs, ParseArgs, ParserFlags, RefineArgs, SynthArgs, SynthFlags};

pub fn run(cli: &Cli) -> Result<()> {
    let settings = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    match &cli.command {
        Command::Induce(a) => induce(a, &settings),
        Command::Parse(a) => parse_cmd(a, &settings),
        Command::Refine(a) => refine(a, &settings),
        Command::Synth(a) => synth(a, &settings),
        Command::Eval(a) => eval(a, &settings),
        Command::Metrics(a) => metrics(a),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_grammar(path: &Path) -> Result<Grammar> {
    load_grammar(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn read_matrix(path: &Path) -> Result<FrameProbMatrix> {
    FrameProbMatrix::from_csv(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn induce(a: &InduceArgs, s: &Settings) -> Result<()> {
    let algo = s.get(a.algo.clone(), "algo", "kari".to_string())?;
    let mut corpora = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let c = Corpus::parse(&read(path)?, !a.keep_repeats).with_context(|| format!("loading {}", path.display()))?;
        let name = c.activity.clone().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "activity".into())
        });
        corpora.push((name, c));
    }
    let grammar = match algo.as_str() {
        "flat" => {
            let refs: Vec<(&str, &Corpus)> = corpora.iter().map(|(n, c)| (n.as_str(), c)).collect();
            induce_flat(&refs, ActivityWeighting::Counts)?
        }
        "kari" => {
            let opts = KariOptions {
                n_key: s.positive(a.n_key, "n-key", 4)?,
                perms: s.get(a.perms.as_deref().map(str::parse::<PermPolicy>).transpose()?, "perms", PermPolicy::Observed)?,
                ..KariOptions::default()
            };
            let parts = corpora
                .iter()
                .map(|(name, c)| {
                    let (g, report) = induce_with(c, &opts).with_context(|| format!("inducing {name}"))?;
                    log::info!(
                        "{name}: keys {:?}, skipped {}, irregular middles {}, merged cycles {}",
                        report.keys,
                        report.skipped,
                        report.irregular_middles,
                        report.merged_cycles
                    );
                    Ok((g, c.len() as f64))
                })
                .collect::<Result<Vec<_>>>()?;
            combine(parts)?
        }
        "right-regular" | "rr" => {
            let order = s.get(a.order, "order", 2)?;
            let cfg = NGramConfig {
                order: (order > 0).then_some(order),
                smoothing: s.get(a.smoothing, "smoothing", 0.0)?,
            };
            let parts = corpora
                .iter()
                .map(|(_, c)| Ok((induce_right_regular(c, &cfg)?, c.len() as f64)))
                .collect::<Result<Vec<_>>>()?;
            combine(parts)?
        }
        other => bail!("unknown algorithm `{other}`"),
    };
    emit(a.output.as_deref(), &save_grammar(&grammar))
}

fn combine(mut parts: Vec<(Grammar, f64)>) -> Result<Grammar> {
    if parts.len() == 1 {
        return Ok(parts.pop().expect("one part").0);
    }
    let refs: Vec<(&Grammar, f64)> = parts.iter().map(|(g, w)| (g, *w)).collect();
    Ok(merge_grammars(&refs)?)
}

fn parser_options(p: &ParserFlags, s: &Settings) -> Result<(ParseOptions, usize)> {
    let policy: QueuePolicy = s.get(p.policy.as_deref().map(str::parse).transpose()?, "policy", QueuePolicy::Depth)?;
    let queue = s.get(p.queue, "queue", 20)?;
    let opts = ParseOptions {
        queue_size: (queue > 0).then_some(queue),
        policy,
        max_actions: s.positive(p.max_actions, "max-actions", 20)?,
        ..ParseOptions::default()
    };
    Ok((opts, s.positive(p.stride, "stride", 1)?))
}

fn parse_cmd(a: &ParseArgs, s: &Settings) -> Result<()> {
    let g = read_grammar(&a.grammar)?;
    let y = read_matrix(&a.probs)?;
    let (mut opts, stride) = parser_options(&a.parser, s)?;
    opts.trace = a.trace;
    let small = y.downsample(stride);
    let r = parse(&small, &g, &opts)?;
    if a.trace {
        for e in &r.trace {
            eprintln!(
                "m={} n={} d={} prefix=[{}] logprob={:.6} grammar={:.6}",
                e.m,
                e.n,
                e.depth,
                e.prefix.join(" "),
                e.logprob,
                e.grammar_logprob.exp()
            );
        }
    }
    let mut out = String::new();
    writeln!(out, "{}", r.best_sequence.join(" "))?;
    writeln!(out, "logprob\t{:.9}", r.best_logprob)?;
    writeln!(out, "grammar_prob\t{:.9}", r.grammar_logprob.exp())?;
    if let Some(c) = &r.runner_up {
        writeln!(out, "runner_up\t{}\t{:.9}", c.sequence.join(" "), c.grammar_logprob.exp())?;
    }
    if let Some(path) = &a.labels {
        let seg = optimal_lengths(&small, &r.best_sequence)?;
        let labels = upsample_labels(&seg.to_framewise(), stride, y.frames());
        write_atomic(path, &labels_to_text(&labels))?;
    }
    emit(a.output.as_deref(), &out)
}

fn read_manifest(path: &Path) -> Result<Vec<(FrameProbMatrix, Vec<String>)>> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut items = Vec::new();
    for (i, line) in read(path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [probs, labels] = fields[..] else {
            bail!("{} line {}: expected `<matrix.csv> <labels>`", path.display(), i + 1);
        };
        let resolve = |p: &str| -> PathBuf { base.join(p) };
        let y = read_matrix(&resolve(probs))?;
        let gt = parse_labels(&read(&resolve(labels))?);
        items.push((y, gt));
    }
    Ok(items)
}

fn refine(a: &RefineArgs, s: &Settings) -> Result<()> {
    let g = read_grammar(&a.grammar)?;
    let inputs = read_manifest(&a.manifest)?;
    let (parse, stride) = parser_options(&a.parser, s)?;
    let report = refine_dataset(&inputs, &g, &RefineOptions { parse, stride })?;
    let failures = report.videos.iter().filter(|v| v.failure.is_some()).count();
    let fmt = |x: &SegmentationScores| {
        format!(
            "edit {:.4} f1@10 {:.4} f1@25 {:.4} f1@50 {:.4} acc {:.4}",
            x.edit, x.f1_10, x.f1_25, x.f1_50, x.accuracy
        )
    };
    let summary = format!(
        "videos {}\nfailures {failures}\nbefore {}\nafter {}\n",
        report.videos.len(),
        fmt(&report.mean_before),
        fmt(&report.mean_after)
    );
    match &a.output {
        Some(path) => {
            write_atomic(path, &report.to_csv()?)?;
            print!("{summary}");
        }
        None => print!("{}", report.to_csv()?),
    }
    Ok(())
}

fn synth_config(f: &SynthFlags, s: &Settings) -> Result<SynthConfig> {
    let d = SynthConfig::default();
    let grammar_type: GrammarType = s.get(f.grammar_type.as_deref().map(str::parse).transpose()?, "type", d.grammar_type)?;
    Ok(SynthConfig {
        n_variables: s.positive(f.variables, "variables", d.n_variables)?,
        n_terminals: s.positive(f.terminals, "terminals", d.n_terminals)?,
        grammar_type,
        n_key_terminals: s.positive(f.keys, "keys", d.n_key_terminals)?,
        seed: s.get(f.seed, "seed", d.seed)?,
        ..d
    })
}

fn synth(a: &SynthArgs, s: &Settings) -> Result<()> {
    let d = FixtureConfig::default();
    let synth = synth_config(&a.synth, s)?;
    let cfg = FixtureConfig {
        seed: synth.seed,
        videos: s.positive(a.videos, "videos", d.videos)?,
        training_sequences: s.positive(a.training, "training", d.training_sequences)?,
        stride: s.positive(a.stride, "stride", d.stride)?,
        noise: s.get(a.noise, "noise", d.noise)?,
        synth,
        ..d
    };
    let fixture = RefineFixture::generate(&cfg)?;
    let out = StagedDir::new(&a.out_dir, a.force)?;
    out.write("truth.pcfg", &save_grammar(&fixture.truth))?;
    out.write("induced.pcfg", &save_grammar(&fixture.induced))?;
    out.write("self.pcfg", &save_grammar(&fixture.self_grammar(cfg.synth.n_key_terminals)?))?;
    out.write("train.txt", &Corpus::new(None, fixture.training.clone())?.to_text())?;
    let mut noisy = String::new();
    let mut clean = String::new();
    for (i, v) in fixture.videos.iter().enumerate() {
        let stem = format!("videos/{i:03}");
        out.write(&format!("{stem}.csv"), &v.noisy.to_csv()?)?;
        out.write(&format!("{stem}_clean.csv"), &v.clean.to_csv()?)?;
        out.write(&format!("{stem}.labels"), &labels_to_text(&v.gt))?;
        writeln!(noisy, "{stem}.csv {stem}.labels")?;
        writeln!(clean, "{stem}_clean.csv {stem}.labels")?;
    }
    out.write("manifest.txt", &noisy)?;
    out.write("manifest_clean.txt", &clean)?;
    out.commit()
}

fn eval(a: &EvalArgs, s: &Settings) -> Result<()> {
    let base = synth_config(&a.synth, s)?;
    let cfg = SynthConfig {
        n_grammars: s.positive(a.grammars, "grammars", base.n_grammars)?,
        seq_per_grammar: s.positive(a.sequences, "sequences", base.seq_per_grammar)?,
        seen_fraction: s.get(a.seen, "seen", base.seen_fraction)?,
        ..base
    };
    let algo_name = s.get(a.algo.clone(), "algo", "kari".to_string())?;
    let n_key = s.positive(a.n_key, "n-key", cfg.n_key_terminals)?;
    let algo = Algorithm::from_name(&algo_name, n_key)?;
    let report = run_grammar_eval(&cfg, &algo)?;
    let summary = format!("{report}\n");
    if let Some(dir) = &a.out_dir {
        let out = StagedDir::new(dir, a.force)?;
        out.write("per_grammar.csv", &report.per_grammar_csv()?)?;
        out.write("confusion.csv", &report.confusion_csv()?)?;
        out.write("summary.txt", &summary)?;
        out.commit()?;
    }
    print!("{summary}");
    Ok(())
}

fn metrics(a: &MetricsArgs) -> Result<()> {
    let pred = parse_labels(&read(&a.pred)?);
    let gt = parse_labels(&read(&a.gt)?);
    let m = SegmentationScores::compute(&pred, &gt)?;
    let text = format!(
        "edit\t{:.4}\nf1@10\t{:.4}\nf1@25\t{:.4}\nf1@50\t{:.4}\naccuracy\t{:.4}\n",
        m.edit, m.f1_10, m.f1_25, m.f1_50, m.accuracy
    );
    emit(a.output.as_deref(), &text)
}
