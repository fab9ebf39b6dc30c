use std::collections::{BTreeMap, BTreeSet};

/// Temporally ordered action groups of one sequence part.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActionGroupSequence {
    /// Groups in temporal order; actions inside a group are sorted.
    pub groups: Vec<Vec<String>>,
    /// `h_lists[i][s]`: sub-sequence `s` restricted to group `i`.
    pub h_lists: Vec<Vec<Vec<String>>>,
    pub part_alphabet: BTreeSet<String>,
    /// Number of precedence cycles merged into single groups.
    pub merged_cycles: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups the actions of `part` so that actions without a consistent
/// temporal order share a group, and orders the groups.
///
/// `a` precedes `b` when they co-occur at least once and, in every
/// sub-sequence containing both, the last `a` comes before the first `b`.
pub fn build_action_groups(part: &[Vec<String>]) -> ActionGroupSequence {
    let alphabet: BTreeSet<String> = part.iter().flatten().cloned().collect();
    let actions: Vec<&String> = alphabet.iter().collect();
    let n = actions.len();
    if n == 0 {
        return ActionGroupSequence {
            part_alphabet: alphabet,
            ..Default::default()
        };
    }
    let idx: BTreeMap<&str, usize> = actions.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();

    let mut cooccur = vec![vec![false; n]; n];
    let mut violated = vec![vec![false; n]; n];
    for s in part {
        let mut first = vec![usize::MAX; n];
        let mut last = vec![0usize; n];
        for (p, a) in s.iter().enumerate() {
            let i = idx[a.as_str()];
            first[i] = first[i].min(p);
            last[i] = p;
        }
        let present: Vec<usize> = (0..n).filter(|&i| first[i] != usize::MAX).collect();
        for &a in &present {
            for &b in &present {
                if a != b {
                    cooccur[a][b] = true;
                    if last[a] >= first[b] {
                        violated[a][b] = true;
                    }
                }
            }
        }
    }
    let prec = |a: usize, b: usize| a != b && cooccur[a][b] && !violated[a][b];

    let mut uf = UnionFind((0..n).collect());
    for a in 0..n {
        for b in a + 1..n {
            if !prec(a, b) && !prec(b, a) {
                uf.union(a, b);
            }
        }
    }
    let mut comp_of = vec![0usize; n];
    let mut roots: Vec<usize> = Vec::new();
    for (a, c) in comp_of.iter_mut().enumerate() {
        let r = uf.find(a);
        *c = match roots.iter().position(|&x| x == r) {
            Some(p) => p,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
    }
    let k = roots.len();
    let mut edge = vec![vec![false; k]; k];
    for a in 0..n {
        for b in 0..n {
            if comp_of[a] != comp_of[b] && prec(a, b) {
                edge[comp_of[a]][comp_of[b]] = true;
            }
        }
    }
    // transitive closure; mutually reachable components form a cycle
    let mut reach = edge.clone();
    for m in 0..k {
        for i in 0..k {
            if reach[i][m] {
                let via = reach[m].clone();
                for (r, v) in reach[i].iter_mut().zip(via) {
                    *r |= v;
                }
            }
        }
    }
    let mut scc = vec![usize::MAX; k];
    let mut n_scc = 0;
    let mut merged_cycles = 0;
    for i in 0..k {
        if scc[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (i..k).filter(|&j| j == i || (reach[i][j] && reach[j][i])).collect();
        if members.len() > 1 {
            merged_cycles += 1;
        }
        for j in members {
            scc[j] = n_scc;
        }
        n_scc += 1;
    }
    // order groups by how many other groups precede them
    let mut before = vec![0usize; n_scc];
    let mut seen = vec![vec![false; n_scc]; n_scc];
    for i in 0..k {
        for j in 0..k {
            if reach[i][j] && scc[i] != scc[j] && !seen[scc[i]][scc[j]] {
                seen[scc[i]][scc[j]] = true;
                before[scc[j]] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..n_scc).collect();
    let mut groups_by_scc: Vec<Vec<String>> = vec![Vec::new(); n_scc];
    for a in 0..n {
        groups_by_scc[scc[comp_of[a]]].push(actions[a].clone());
    }
    order.sort_by_key(|&g| (before[g], groups_by_scc[g].clone()));
    let groups: Vec<Vec<String>> = order.into_iter().map(|g| groups_by_scc[g].clone()).collect();

    let h_lists = groups
        .iter()
        .map(|grp| {
            part.iter()
                .map(|s| s.iter().filter(|a| grp.contains(a)).cloned().collect())
                .collect()
        })
        .collect();
    ActionGroupSequence {
        groups,
        h_lists,
        part_alphabet: alphabet,
        merged_cycles,
    }
}
