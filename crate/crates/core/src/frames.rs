//! Frame-level class probability matrices.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Row-normalization tolerance for loaded matrices.
pub const ROW_TOLERANCE: f64 = 1e-6;

/// `T × |classes|` per-frame class probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameProbMatrix {
    classes: Vec<String>,
    probs: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl FrameProbMatrix {
    pub fn new(classes: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidMatrix("no classes".into()));
        }
        if probs.is_empty() {
            return Err(Error::InvalidMatrix("no frames".into()));
        }
        let mut index = HashMap::new();
        for (i, c) in classes.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidMatrix(format!("duplicate class `{c}`")));
            }
        }
        for (t, row) in probs.iter().enumerate() {
            if row.len() != classes.len() {
                return Err(Error::InvalidMatrix(format!(
                    "row {t} has {} entries, expected {}",
                    row.len(),
                    classes.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidMatrix(format!("row {t} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidMatrix(format!("row {t} sums to {sum}")));
            }
        }
        Ok(FrameProbMatrix { classes, probs, index })
    }

    /// One row per label, probability 1 on that label.
    pub fn one_hot(classes: &[String], labels: &[String]) -> Result<Self> {
        let index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let probs = labels
            .iter()
            .map(|l| {
                let k = *index
                    .get(l.as_str())
                    .ok_or_else(|| Error::InvalidMatrix(format!("label `{l}` is not a class")))?;
                let mut row = vec![0.0; classes.len()];
                row[k] = 1.0;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(classes.to_vec(), probs)
    }

    pub fn uniform(classes: &[String], frames: usize) -> Result<Self> {
        let p = 1.0 / classes.len().max(1) as f64;
        Self::new(classes.to_vec(), vec![vec![p; classes.len()]; frames])
    }

    pub fn frames(&self) -> usize {
        self.probs.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn get(&self, t: usize, class: usize) -> f64 {
        self.probs[t][class]
    }

    /// Most probable class per frame; ties go to the lower class index.
    pub fn argmax_labels(&self) -> Vec<String> {
        self.probs
            .iter()
            .map(|row| {
                let mut best = 0;
                for (k, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = k;
                    }
                }
                self.classes[best].clone()
            })
            .collect()
    }

    /// Keeps rows `0, stride, 2·stride, …`.
    pub fn downsample(&self, stride: usize) -> FrameProbMatrix {
        let stride = stride.max(1);
        FrameProbMatrix {
            classes: self.classes.clone(),
            probs: self.probs.iter().step_by(stride).cloned().collect(),
            index: self.index.clone(),
        }
    }

    /// CSV with a header row of class names followed by one row per frame.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let classes: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut probs = Vec::new();
        for (t, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::InvalidMatrix(format!("row {t}: `{f}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            probs.push(row);
        }
        Self::new(classes, probs)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.classes)?;
        for row in &self.probs {
            w.write_record(row.iter().map(|p| format!("{p}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
