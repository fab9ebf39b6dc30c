//! Frame-length allocation for a fixed action sequence.

use crate::error::{Error, Result};
use crate::frames::FrameProbMatrix;
use crate::logspace::ln;

/// Actions with their frame counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentLabeling {
    pub actions: Vec<String>,
    pub lengths: Vec<usize>,
}

impl SegmentLabeling {
    pub fn frames(&self) -> usize {
        self.lengths.iter().sum()
    }

    pub fn to_framewise(&self) -> Vec<String> {
        to_framewise(self)
    }
}

pub fn to_framewise(s: &SegmentLabeling) -> Vec<String> {
    s.actions
        .iter()
        .zip(&s.lengths)
        .flat_map(|(a, &l)| std::iter::repeat_n(a.clone(), l))
        .collect()
}

/// Run-length encoding of a frame label stream.
pub fn from_framewise(labels: &[String]) -> SegmentLabeling {
    let mut actions: Vec<String> = Vec::new();
    let mut lengths: Vec<usize> = Vec::new();
    for l in labels {
        if actions.last() == Some(l) {
            *lengths.last_mut().expect("parallel vectors") += 1;
        } else {
            actions.push(l.clone());
            lengths.push(1);
        }
    }
    SegmentLabeling { actions, lengths }
}

fn log_rows(y: &FrameProbMatrix, actions: &[String]) -> Vec<Vec<f64>> {
    actions
        .iter()
        .map(|a| match y.class_index(a) {
            Some(k) => (0..y.frames()).map(|t| ln(y.get(t, k))).collect(),
            None => vec![f64::NEG_INFINITY; y.frames()],
        })
        .collect()
}

/// Most probable allocation of the frames of `y` to `actions`, each
/// segment at least one frame long.
pub fn optimal_lengths(y: &FrameProbMatrix, actions: &[String]) -> Result<SegmentLabeling> {
    optimal_lengths_with_floor(y, actions, 1)
}

/// As [`optimal_lengths`] with a minimum segment length of `floor` frames.
/// Ties go to the earliest boundary.
pub fn optimal_lengths_with_floor(y: &FrameProbMatrix, actions: &[String], floor: usize) -> Result<SegmentLabeling> {
    if actions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let floor = floor.max(1);
    let t_len = y.frames();
    let n = actions.len();
    if n * floor > t_len {
        return Err(Error::TooManySegments {
            segments: n,
            frames: t_len,
        });
    }
    let rows = log_rows(y, actions);
    let neg = f64::NEG_INFINITY;
    // best[k][t]: first k segments cover frames 0..t
    let mut best = vec![vec![neg; t_len + 1]; n + 1];
    let mut back = vec![vec![0usize; t_len + 1]; n + 1];
    best[0][0] = 0.0;
    let mut seg = vec![0.0; t_len + 1];
    for k in 1..=n {
        let row = &rows[k - 1];
        let lo_end = k * floor;
        let hi_end = t_len - (n - k) * floor;
        for t in lo_end..=hi_end {
            // seg[i] = log-prob of frames i..t under action k
            let lo_start = (k - 1) * floor;
            let hi_start = t - floor;
            let mut acc: f64 = row[hi_start + 1..t].iter().sum();
            for i in (lo_start..=hi_start).rev() {
                acc += row[i];
                seg[i] = acc;
            }
            let mut arg = lo_start;
            let mut val = best[k - 1][lo_start] + seg[lo_start];
            for i in lo_start + 1..=hi_start {
                let cand = best[k - 1][i] + seg[i];
                if cand > val {
                    val = cand;
                    arg = i;
                }
            }
            best[k][t] = val;
            back[k][t] = arg;
        }
    }
    let mut lengths = vec![0usize; n];
    let mut t = t_len;
    for k in (1..=n).rev() {
        let i = back[k][t];
        lengths[k - 1] = t - i;
        t = i;
    }
    Ok(SegmentLabeling {
        actions: actions.to_vec(),
        lengths,
    })
}

/// Log-probability of a labeling under `y`.
pub fn labeling_logprob(y: &FrameProbMatrix, s: &SegmentLabeling) -> f64 {
    let rows = log_rows(y, &s.actions);
    let mut t = 0;
    let mut total = 0.0;
    for (k, &l) in s.lengths.iter().enumerate() {
        total += (t..t + l).map(|j| rows[k][j]).sum::<f64>();
        t += l;
    }
    total
}

/// Repeats each label `stride` times, then truncates or pads with the last
/// label to `frames`.
pub fn upsample_labels(labels: &[String], stride: usize, frames: usize) -> Vec<String> {
    let mut out: Vec<String> = labels
        .iter()
        .flat_map(|l| std::iter::repeat_n(l.clone(), stride.max(1)))
        .take(frames)
        .collect();
    if let Some(last) = out.last().cloned() {
        out.resize(frames, last);
    }
    out
}

/// Frame-label file: one label per line.
pub fn parse_labels(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn labels_to_text(labels: &[String]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push_str(l);
        out.push('\n');
    }
    out
}
