use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Selected key actions, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct KeySelection {
    pub keys: Vec<String>,
    /// How many fewer keys than requested were available.
    pub shortfall: usize,
}

/// Picks the `n_key` most frequent actions among those present in every
/// sequence. Ties go to the earlier mean position, then to the smaller token.
pub fn select_key_actions(c: &Corpus, n_key: usize) -> Result<KeySelection> {
    if n_key == 0 {
        return Err(Error::InvalidConfig("n_key must be at least 1".into()));
    }
    if c.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut universal: BTreeSet<&str> = c.sequences[0].iter().map(String::as_str).collect();
    for s in &c.sequences[1..] {
        let here: BTreeSet<&str> = s.iter().map(String::as_str).collect();
        universal = universal.intersection(&here).copied().collect();
    }
    if universal.is_empty() {
        return Err(Error::NoKeyActions);
    }
    // (count, position sum) per universal action
    let mut stats: BTreeMap<&str, (usize, usize)> = universal.iter().map(|a| (*a, (0, 0))).collect();
    for s in &c.sequences {
        for (pos, a) in s.iter().enumerate() {
            if let Some(e) = stats.get_mut(a.as_str()) {
                e.0 += 1;
                e.1 += pos;
            }
        }
    }
    let mut ranked: Vec<(&str, usize, f64)> = stats
        .into_iter()
        .map(|(a, (n, sum))| (a, n, sum as f64 / n as f64))
        .collect();
    ranked.sort_by(|x, y| {
        y.1.cmp(&x.1)
            .then(x.2.partial_cmp(&y.2).unwrap_or(std::cmp::Ordering::Equal))
            .then(x.0.cmp(y.0))
    });
    let keys: Vec<String> = ranked.iter().take(n_key).map(|r| r.0.to_string()).collect();
    Ok(KeySelection {
        shortfall: n_key - keys.len(),
        keys,
    })
}

/// Splits `a` into the parts before, between (inclusive) and after its key
/// actions.
pub fn split_sequence(a: &[String], keys: &[String]) -> Result<(Vec<String>, Vec<String>, Vec<String>)> {
    if let Some(k) = keys.iter().find(|k| !a.contains(k)) {
        return Err(Error::MissingKeyAction(k.clone()));
    }
    let is_key = |t: &String| keys.contains(t);
    let first = a.iter().position(is_key).ok_or(Error::NoKeyActions)?;
    let last = a.iter().rposition(is_key).expect("a key occurs");
    Ok((a[..first].to_vec(), a[first..=last].to_vec(), a[last + 1..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_sequence_orders_by_first_occurrence() {
        let c = Corpus::from_slices(&[&["a", "b"]]);
        let k = select_key_actions(&c, 2).unwrap();
        assert_eq!(k.keys, v(&["a", "b"]));
        assert_eq!(k.shortfall, 0);
    }

    #[test]
    fn shortfall_is_recorded() {
        let c = Corpus::from_slices(&[&["a", "b"], &["c", "b"]]);
        let k = select_key_actions(&c, 2).unwrap();
        assert_eq!(k.keys, v(&["b"]));
        assert_eq!(k.shortfall, 1);
    }

    #[test]
    fn no_universal_action() {
        let c = Corpus::from_slices(&[&["a"], &["b"]]);
        assert_eq!(select_key_actions(&c, 1), Err(Error::NoKeyActions));
    }

    #[test]
    fn split_examples() {
        let (l, m, r) = split_sequence(&v(&["x", "k1", "y", "k2", "z"]), &v(&["k1", "k2"])).unwrap();
        assert_eq!((l, m, r), (v(&["x"]), v(&["k1", "y", "k2"]), v(&["z"])));
        let (l, m, r) = split_sequence(&v(&["k"]), &v(&["k"])).unwrap();
        assert!(l.is_empty() && r.is_empty());
        assert_eq!(m, v(&["k"]));
        assert_eq!(
            split_sequence(&v(&["a"]), &v(&["k"])),
            Err(Error::MissingKeyAction("k".into()))
        );
    }
}
