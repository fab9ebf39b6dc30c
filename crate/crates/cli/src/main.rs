//! `actgram` command-line tool.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "actgram", version, about = "Activity grammar induction, parsing and refinement")]
pub struct Cli {
    /// key=value file supplying defaults for flags not given explicitly
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Increase log verbosity on standard error (-v, -vv)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Induce a grammar from one or more corpus files
    Induce(InduceArgs),
    /// Find the most probable grammatical action sequence for a probability matrix
    Parse(ParseArgs),
    /// Refine a set of probability matrices and score them against ground truth
    Refine(RefineArgs),
    /// Generate a synthetic refinement fixture
    Synth(SynthArgs),
    /// Run the synthetic grammar precision/recall benchmark
    Eval(EvalArgs),
    /// Score predicted frame labels against ground truth
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
pub struct InduceArgs {
    /// Corpus files, one action sequence per line
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output grammar file (standard output when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// kari, flat or right-regular [default: kari]
    #[arg(long)]
    pub algo: Option<String>,
    /// Number of key actions [default: 4]
    #[arg(long)]
    pub n_key: Option<usize>,
    /// Key orders: observed or all [default: observed]
    #[arg(long)]
    pub perms: Option<String>,
    /// Right-regular context length, 0 for the full history [default: 2]
    #[arg(long)]
    pub order: Option<usize>,
    /// Right-regular smoothing mass [default: 0]
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Keep immediate action repetitions in the corpus
    #[arg(long)]
    pub keep_repeats: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ParserFlags {
    /// Queue policy: bep (depth first) or gep (probability first) [default: bep]
    #[arg(long)]
    pub policy: Option<String>,
    /// Queue size, 0 for unlimited [default: 20]
    #[arg(long)]
    pub queue: Option<usize>,
    /// Longest action sequence considered [default: 20]
    #[arg(long)]
    pub max_actions: Option<usize>,
    /// Temporal downsampling before parsing [default: 1]
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    #[arg(long)]
    pub grammar: PathBuf,
    /// CSV matrix with a header of class names and one row per frame
    #[arg(long)]
    pub probs: PathBuf,
    #[command(flatten)]
    pub parser: ParserFlags,
    /// Write refined frame labels here
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output file for the parse summary (standard output when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print popped batches to standard error
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    #[arg(long)]
    pub grammar: PathBuf,
    /// Lines of `<matrix.csv> <labels>` paths, relative to the manifest
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub parser: ParserFlags,
    /// Report CSV (standard output when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SynthFlags {
    /// Variables per grammar, start included [default: 10]
    #[arg(long)]
    pub variables: Option<usize>,
    /// Shared terminals [default: 10]
    #[arg(long)]
    pub terminals: Option<usize>,
    /// Grammar type I or II [default: I]
    #[arg(long = "type")]
    pub grammar_type: Option<String>,
    /// Key terminals per grammar [default: 3]
    #[arg(long)]
    pub keys: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output directory
    #[arg(short, long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub synth: SynthFlags,
    /// Number of videos [default: 50]
    #[arg(long)]
    pub videos: Option<usize>,
    /// Training sequences for the induced grammar [default: 100]
    #[arg(long)]
    pub training: Option<usize>,
    /// Segment lengths are multiples of this [default: 4]
    #[arg(long)]
    pub stride: Option<usize>,
    /// Weight of the random row mixed into each frame [default: 0.2]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Replace a non-empty output directory
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// kari, flat, right-regular or oracle [default: kari]
    #[arg(long)]
    pub algo: Option<String>,
    #[command(flatten)]
    pub synth: SynthFlags,
    /// Number of synthetic grammars [default: 20]
    #[arg(long)]
    pub grammars: Option<usize>,
    /// Sequences sampled per grammar [default: 50]
    #[arg(long)]
    pub sequences: Option<usize>,
    /// Share of sequences used for induction [default: 0.5]
    #[arg(long)]
    pub seen: Option<f64>,
    /// Key actions used by KARI [default: the number of key terminals]
    #[arg(long)]
    pub n_key: Option<usize>,
    /// Directory for per_grammar.csv, confusion.csv and summary.txt
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// Replace a non-empty output directory
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Predicted frame labels, one per line
    pub pred: PathBuf,
    /// Ground-truth frame labels, one per line
    pub gt: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let line = text.lines().next().unwrap_or("error: invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
