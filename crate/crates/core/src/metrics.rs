//! Segmentation metrics on frame label streams, all in `[0, 100]`.

use crate::error::{Error, Result};

struct Segment<'a> {
    label: &'a str,
    start: usize,
    end: usize,
}

fn segments(labels: &[String]) -> Vec<Segment<'_>> {
    let mut out: Vec<Segment<'_>> = Vec::new();
    for (t, l) in labels.iter().enumerate() {
        match out.last_mut() {
            Some(s) if s.label == l => s.end = t + 1,
            _ => out.push(Segment {
                label: l,
                start: t,
                end: t + 1,
            }),
        }
    }
    out
}

fn levenshtein(a: &[&str], b: &[&str]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Segment-level Levenshtein similarity.
pub fn edit_score(pred: &[String], gt: &[String]) -> Result<f64> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::EmptyInput);
    }
    let p: Vec<&str> = segments(pred).iter().map(|s| s.label).collect();
    let g: Vec<&str> = segments(gt).iter().map(|s| s.label).collect();
    let d = levenshtein(&p, &g) as f64;
    Ok((1.0 - d / p.len().max(g.len()) as f64) * 100.0)
}

fn check_lengths(pred: &[String], gt: &[String]) -> Result<()> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    Ok(())
}

/// Segmental F1 at IoU threshold `tau`. Each predicted segment is matched
/// to the ground-truth segment of highest IoU; it is a hit when that IoU
/// reaches `tau`, the classes agree and the ground-truth segment is unused.
pub fn f1_at(pred: &[String], gt: &[String], tau: f64) -> Result<f64> {
    check_lengths(pred, gt)?;
    let ps = segments(pred);
    let gs = segments(gt);
    let mut used = vec![false; gs.len()];
    let mut tp = 0usize;
    let mut fp = 0usize;
    for p in &ps {
        let mut best = None;
        let mut best_iou = f64::NEG_INFINITY;
        for (j, g) in gs.iter().enumerate() {
            if g.label != p.label {
                continue;
            }
            let inter = p.end.min(g.end) as f64 - p.start.max(g.start) as f64;
            let union = p.end.max(g.end) as f64 - p.start.min(g.start) as f64;
            let iou = inter / union;
            if iou > best_iou {
                best_iou = iou;
                best = Some(j);
            }
        }
        match best {
            Some(j) if best_iou >= tau && !used[j] => {
                used[j] = true;
                tp += 1;
            }
            _ => fp += 1,
        }
    }
    let fn_ = gs.len() - tp;
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok(2.0 * precision * recall / (precision + recall) * 100.0)
}

/// Percentage of frames with equal labels.
pub fn frame_accuracy(pred: &[String], gt: &[String]) -> Result<f64> {
    check_lengths(pred, gt)?;
    let hits = pred.iter().zip(gt).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / gt.len() as f64 * 100.0)
}

/// Edit, F1@{10,25,50} and accuracy of one prediction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SegmentationScores {
    pub edit: f64,
    pub f1_10: f64,
    pub f1_25: f64,
    pub f1_50: f64,
    pub accuracy: f64,
}

impl SegmentationScores {
    pub fn compute(pred: &[String], gt: &[String]) -> Result<Self> {
        Ok(SegmentationScores {
            edit: edit_score(pred, gt)?,
            f1_10: f1_at(pred, gt, 0.10)?,
            f1_25: f1_at(pred, gt, 0.25)?,
            f1_50: f1_at(pred, gt, 0.50)?,
            accuracy: frame_accuracy(pred, gt)?,
        })
    }

    pub fn mean(items: &[SegmentationScores]) -> SegmentationScores {
        if items.is_empty() {
            return SegmentationScores::default();
        }
        let n = items.len() as f64;
        let sum = |f: fn(&SegmentationScores) -> f64| items.iter().map(f).sum::<f64>() / n;
        SegmentationScores {
            edit: sum(|s| s.edit),
            f1_10: sum(|s| s.f1_10),
            f1_25: sum(|s| s.f1_25),
            f1_50: sum(|s| s.f1_50),
            accuracy: sum(|s| s.accuracy),
        }
    }
}
