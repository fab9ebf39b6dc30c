//! Action-sequence corpora.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type ActionSequence = Vec<String>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub activity: Option<String>,
    pub sequences: Vec<ActionSequence>,
}

impl Corpus {
    /// Empty sequences are rejected.
    pub fn new(activity: Option<String>, sequences: Vec<ActionSequence>) -> Result<Self> {
        if sequences.iter().any(Vec::is_empty) {
            return Err(Error::EmptyInput);
        }
        Ok(Corpus { activity, sequences })
    }

    pub fn from_slices(sequences: &[&[&str]]) -> Self {
        Corpus {
            activity: None,
            sequences: sequences
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        }
    }

    /// One sequence per non-blank line; `%activity <label>` sets the label
    /// and `#` starts a comment line.
    pub fn parse(text: &str, dedup: bool) -> Result<Self> {
        let mut activity = None;
        let mut sequences = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("%activity") {
                activity = Some(rest.trim().to_string());
                continue;
            }
            let seq: ActionSequence = line.split_whitespace().map(str::to_string).collect();
            sequences.push(if dedup { dedup_adjacent(&seq) } else { seq });
        }
        Corpus::new(activity, sequences)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(a) = &self.activity {
            out.push_str("%activity ");
            out.push_str(a);
            out.push('\n');
        }
        for s in &self.sequences {
            out.push_str(&s.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn alphabet(&self) -> BTreeSet<String> {
        self.sequences.iter().flatten().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// Collapses runs of equal adjacent tokens.
pub fn dedup_adjacent(seq: &[String]) -> ActionSequence {
    let mut out: ActionSequence = seq.to_vec();
    out.dedup();
    out
}
