//! Grammar-based refinement of frame-wise class probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ActionSequence, Corpus};
use crate::error::{Error, Result};
use crate::frames::FrameProbMatrix;
use crate::grammar::{Grammar, Sampler};
use crate::kari::{induce_with, KariOptions};
use crate::metrics::SegmentationScores;
use crate::parser::{parse, ParseOptions};
use crate::segment::{optimal_lengths, upsample_labels};
use crate::synth::{generate_synthetic_grammar, SynthConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOptions {
    pub parse: ParseOptions,
    /// Temporal downsampling factor applied before parsing.
    pub stride: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            parse: ParseOptions::default(),
            stride: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoResult {
    pub before: SegmentationScores,
    /// Equal to `before` when parsing failed.
    pub after: SegmentationScores,
    pub sequence: Vec<String>,
    pub labels: Vec<String>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineReport {
    pub videos: Vec<VideoResult>,
    pub mean_before: SegmentationScores,
    pub mean_after: SegmentationScores,
}

/// Refined frame labels for one matrix: parse the downsampled matrix, fit
/// segment lengths to the best sequence, then upsample.
pub fn refine_labels(y: &FrameProbMatrix, g: &Grammar, opts: &RefineOptions) -> Result<(Vec<String>, Vec<String>)> {
    if opts.stride == 0 {
        return Err(Error::InvalidConfig("stride must be positive".into()));
    }
    let small = y.downsample(opts.stride);
    let result = parse(&small, g, &opts.parse)?;
    let seg = optimal_lengths(&small, &result.best_sequence)?;
    let labels = upsample_labels(&seg.to_framewise(), opts.stride, y.frames());
    Ok((result.best_sequence, labels))
}

pub fn refine_dataset(inputs: &[(FrameProbMatrix, Vec<String>)], g: &Grammar, opts: &RefineOptions) -> Result<RefineReport> {
    let mut videos = Vec::with_capacity(inputs.len());
    for (y, gt) in inputs {
        let raw = y.argmax_labels();
        let before = SegmentationScores::compute(&raw, gt)?;
        let video = match refine_labels(y, g, opts) {
            Ok((sequence, labels)) => VideoResult {
                before,
                after: SegmentationScores::compute(&labels, gt)?,
                sequence,
                labels,
                failure: None,
            },
            Err(e) => {
                log::warn!("refinement failed: {e}");
                VideoResult {
                    before,
                    after: before,
                    sequence: Vec::new(),
                    labels: raw,
                    failure: Some(e.to_string()),
                }
            }
        };
        videos.push(video);
    }
    let before: Vec<_> = videos.iter().map(|v| v.before).collect();
    let after: Vec<_> = videos.iter().map(|v| v.after).collect();
    Ok(RefineReport {
        mean_before: SegmentationScores::mean(&before),
        mean_after: SegmentationScores::mean(&after),
        videos,
    })
}

impl RefineReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "video", "stage", "edit", "f1_10", "f1_25", "f1_50", "accuracy", "failure",
        ])?;
        let mut row = |name: String, stage: &str, s: &SegmentationScores, fail: &str| {
            w.write_record([
                name,
                stage.to_string(),
                format!("{:.4}", s.edit),
                format!("{:.4}", s.f1_10),
                format!("{:.4}", s.f1_25),
                format!("{:.4}", s.f1_50),
                format!("{:.4}", s.accuracy),
                fail.to_string(),
            ])
        };
        for (i, v) in self.videos.iter().enumerate() {
            let fail = v.failure.as_deref().unwrap_or("");
            row(i.to_string(), "before", &v.before, fail)?;
            row(i.to_string(), "after", &v.after, fail)?;
        }
        row("mean".into(), "before", &self.mean_before, "")?;
        row("mean".into(), "after", &self.mean_after, "")?;
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Synthetic videos for refinement experiments.
#[derive(Clone, Debug)]
pub struct RefineFixture {
    /// Generating grammar.
    pub truth: Grammar,
    /// KARI grammar induced from `training`.
    pub induced: Grammar,
    pub training: Vec<ActionSequence>,
    pub classes: Vec<String>,
    pub videos: Vec<FixtureVideo>,
}

#[derive(Clone, Debug)]
pub struct FixtureVideo {
    pub sequence: Vec<String>,
    pub gt: Vec<String>,
    pub clean: FrameProbMatrix,
    pub noisy: FrameProbMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureConfig {
    pub seed: u64,
    pub videos: usize,
    pub training_sequences: usize,
    pub stride: usize,
    /// Segment lengths are `stride * k` with `k` uniform in this range.
    pub min_units: usize,
    pub max_units: usize,
    /// Weight of the random row mixed into each one-hot row.
    pub noise: f64,
    pub synth: SynthConfig,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            seed: 7,
            videos: 50,
            training_sequences: 100,
            stride: 4,
            min_units: 2,
            max_units: 6,
            noise: 0.2,
            synth: SynthConfig::default(),
        }
    }
}

impl RefineFixture {
    pub fn generate(cfg: &FixtureConfig) -> Result<Self> {
        if !(0.0..0.5).contains(&cfg.noise) {
            return Err(Error::InvalidConfig("noise must lie in [0, 0.5)".into()));
        }
        if cfg.min_units == 0 || cfg.min_units > cfg.max_units || cfg.stride == 0 {
            return Err(Error::InvalidConfig("invalid segment length range".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let truth = generate_synthetic_grammar(&cfg.synth, 0, &mut rng)?;
        let sampler = Sampler::new(&truth, cfg.synth.max_len());
        let training = (0..cfg.training_sequences)
            .map(|_| sampler.sample_tokens(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        let kari = KariOptions {
            n_key: cfg.synth.n_key_terminals,
            ..KariOptions::default()
        };
        let (induced, _) = induce_with(&Corpus::new(None, training.clone())?, &kari)?;
        let classes = cfg.synth.terminal_names();

        let mut videos = Vec::with_capacity(cfg.videos);
        for _ in 0..cfg.videos {
            let sequence = sampler.sample_tokens(&mut rng)?;
            let gt: Vec<String> = sequence
                .iter()
                .flat_map(|a| {
                    let len = cfg.stride * rng.random_range(cfg.min_units..=cfg.max_units);
                    std::iter::repeat_n(a.clone(), len)
                })
                .collect();
            let clean = FrameProbMatrix::one_hot(&classes, &gt)?;
            let rows = clean
                .rows()
                .iter()
                .map(|row| {
                    let mut r: Vec<f64> = (0..row.len()).map(|_| rng.random::<f64>()).collect();
                    let z: f64 = r.iter().sum();
                    r.iter_mut().for_each(|x| *x /= z);
                    row.iter().zip(&r).map(|(h, n)| (1.0 - cfg.noise) * h + cfg.noise * n).collect()
                })
                .collect();
            let noisy = FrameProbMatrix::new(classes.clone(), rows)?;
            videos.push(FixtureVideo {
                sequence,
                gt,
                clean,
                noisy,
            });
        }
        Ok(RefineFixture {
            truth,
            induced,
            training,
            classes,
            videos,
        })
    }

    /// KARI grammar of the videos' own transcripts.
    pub fn self_grammar(&self, n_key: usize) -> Result<Grammar> {
        let seqs = self.videos.iter().map(|v| v.sequence.clone()).collect();
        induce_with(
            &Corpus::new(None, seqs)?,
            &KariOptions {
                n_key,
                ..KariOptions::default()
            },
        )
        .map(|(g, _)| g)
    }

    pub fn clean_inputs(&self) -> Vec<(FrameProbMatrix, Vec<String>)> {
        self.videos.iter().map(|v| (v.clean.clone(), v.gt.clone())).collect()
    }

    pub fn noisy_inputs(&self) -> Vec<(FrameProbMatrix, Vec<String>)> {
        self.videos.iter().map(|v| (v.noisy.clone(), v.gt.clone())).collect()
    }
}
