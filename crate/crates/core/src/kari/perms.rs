use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::Error;

/// Which key-action orders the middle rule enumerates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PermPolicy {
    /// Orders seen in training, weighted by frequency.
    #[default]
    Observed,
    /// Every order, with add-one smoothing.
    All,
}

impl FromStr for PermPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "observed" => Ok(PermPolicy::Observed),
            "all" => Ok(PermPolicy::All),
            _ => Err(Error::InvalidConfig(format!("unknown permutation policy `{s}`"))),
        }
    }
}

/// Key-action orders of the middle parts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PermutationTable {
    /// Sorted lexicographically.
    pub perms: Vec<Vec<String>>,
    /// Number of middles whose first block uses each permutation.
    pub counts: Vec<f64>,
    /// Number of later blocks using each permutation.
    pub repeat_counts: Vec<f64>,
    /// `gap_corpora[i][j]`: the actions between key `j` and key `j + 1` of
    /// every block using permutation `i`; the last position holds the gap
    /// before the next block (empty for a final block).
    pub gap_corpora: Vec<Vec<Vec<Vec<String>>>>,
    /// Fraction of middles without any block.
    pub first_escape: f64,
    /// Mean number of blocks per regular middle.
    pub avg_blocks: f64,
    pub max_blocks: usize,
    /// Middles that do not split into whole permutations.
    pub irregular: usize,
}

/// One key block: its permutation and the gaps after each key.
type Block = (Vec<String>, Vec<Vec<String>>);

fn split_blocks(middle: &[String], keys: &[String]) -> Option<Vec<Block>> {
    let k = keys.len();
    let positions: Vec<usize> = (0..middle.len()).filter(|&p| keys.contains(&middle[p])).collect();
    if positions.is_empty() || !positions.len().is_multiple_of(k) {
        return None;
    }
    let n_blocks = positions.len() / k;
    let mut blocks = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let ps = &positions[b * k..(b + 1) * k];
        let perm: Vec<String> = ps.iter().map(|&p| middle[p].clone()).collect();
        let mut sorted = perm.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != k {
            return None;
        }
        let mut gaps = Vec::with_capacity(k);
        for j in 0..k {
            let from = ps[j] + 1;
            let to = if j + 1 < k {
                ps[j + 1]
            } else if b + 1 < n_blocks {
                positions[(b + 1) * k]
            } else {
                from
            };
            gaps.push(middle[from..to].to_vec());
        }
        blocks.push((perm, gaps));
    }
    Some(blocks)
}

fn all_permutations(keys: &[String]) -> Vec<Vec<String>> {
    if keys.len() <= 1 {
        return vec![keys.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..keys.len() {
        let mut rest = keys.to_vec();
        let head = rest.remove(i);
        for mut tail in all_permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Largest key set for which `PermPolicy::All` enumerates orders.
pub const MAX_ENUMERATED_KEYS: usize = 7;

pub fn build_permutation_table(middles: &[Vec<String>], keys: &[String], policy: PermPolicy) -> PermutationTable {
    let k = keys.len();
    let mut first: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    let mut later: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    let mut gaps: BTreeMap<Vec<String>, Vec<Vec<Vec<String>>>> = BTreeMap::new();
    let mut irregular = 0;
    let mut empty = 0;
    let mut regular = 0usize;
    let mut total_blocks = 0usize;
    let mut max_blocks = 0usize;
    for m in middles {
        if m.is_empty() {
            empty += 1;
            continue;
        }
        let Some(blocks) = split_blocks(m, keys) else {
            irregular += 1;
            continue;
        };
        regular += 1;
        total_blocks += blocks.len();
        max_blocks = max_blocks.max(blocks.len());
        for (b, (perm, gs)) in blocks.into_iter().enumerate() {
            *if b == 0 { &mut first } else { &mut later }
                .entry(perm.clone())
                .or_insert(0.0) += 1.0;
            let slot = gaps.entry(perm).or_insert_with(|| vec![Vec::new(); k]);
            for (j, g) in gs.into_iter().enumerate() {
                slot[j].push(g);
            }
        }
    }
    let mut perms: Vec<Vec<String>> = gaps.keys().cloned().collect();
    if policy == PermPolicy::All && k <= MAX_ENUMERATED_KEYS {
        for p in all_permutations(keys) {
            if !gaps.contains_key(&p) {
                perms.push(p);
            }
        }
        perms.sort();
    }
    let smooth = if policy == PermPolicy::All { 1.0 } else { 0.0 };
    let counts = perms.iter().map(|p| first.get(p).copied().unwrap_or(0.0) + smooth).collect();
    let repeat_counts = perms.iter().map(|p| later.get(p).copied().unwrap_or(0.0) + smooth).collect();
    let gap_corpora = perms
        .iter()
        .map(|p| gaps.get(p).cloned().unwrap_or_else(|| vec![Vec::new(); k]))
        .collect();
    let considered = regular + empty;
    PermutationTable {
        perms,
        counts,
        repeat_counts,
        gap_corpora,
        first_escape: if considered == 0 { 0.0 } else { empty as f64 / considered as f64 },
        avg_blocks: if regular == 0 { 0.0 } else { total_blocks as f64 / regular as f64 },
        max_blocks,
        irregular,
    }
}
