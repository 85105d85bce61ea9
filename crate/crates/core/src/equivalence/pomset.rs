use std::collections::BTreeSet;

use serde::Serialize;

use crate::semantics::{Dir, Lts};
use crate::term::{tau_label, Configuration, Label};

/// Causal order between keys of a state's configuration, transitively closed.
pub(crate) fn key_order(cfg: &Configuration) -> BTreeSet<(u32, u32)> {
    cfg.order.iter().map(|&(i, j)| (cfg.events[i].1, cfg.events[j].1)).filter(|(a, b)| a != b).collect()
}

/// Labelled partial order, canonical up to isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pomset {
    pub labels: Vec<Label>,
    /// `(i, j)`: event `i` precedes event `j`.
    pub order: Vec<(usize, usize)>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

impl Pomset {
    pub fn new(labels: Vec<Label>, order: &BTreeSet<(usize, usize)>) -> Pomset {
        let n = labels.len();
        let mut best: Option<Pomset> = None;
        for perm in permutations(n) {
            // perm[i] = new position of event i
            let mut ls = labels.clone();
            for (i, &p) in perm.iter().enumerate() {
                ls[p] = labels[i].clone();
            }
            let mut ord: Vec<(usize, usize)> = order.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            ord.sort();
            let cand = Pomset { labels: ls, order: ord };
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
        best.unwrap_or(Pomset { labels: vec![], order: vec![] })
    }

    /// Restriction to non-τ events.
    pub fn visible(&self) -> Pomset {
        let t = tau_label();
        let keep: Vec<usize> = (0..self.labels.len()).filter(|&i| self.labels[i] != t).collect();
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let order = self
            .order
            .iter()
            .filter_map(|&(a, b)| {
                let na = keep.iter().position(|&x| x == a)?;
                let nb = keep.iter().position(|&x| x == b)?;
                Some((na, nb))
            })
            .collect();
        Pomset::new(labels, &order)
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn render(&self) -> String {
        let ls: Vec<&str> = self.labels.iter().map(|l| l.as_str()).collect();
        if self.order.is_empty() {
            format!("{{{}}}", ls.join(","))
        } else {
            let os: Vec<String> = self.order.iter().map(|(a, b)| format!("{a}<{b}")).collect();
            format!("{{{} | {}}}", ls.join(","), os.join(","))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PomsetMove {
    pub dir: Dir,
    pub pomset: Pomset,
    pub target: usize,
}

/// Execution fragments of at most `k` events from `s`, each reified as a pomset.
pub fn pomset_moves(l: &Lts, s: usize, k: usize) -> Vec<PomsetMove> {
    let mut out = BTreeSet::new();
    for dir in [Dir::Fwd, Dir::Rev] {
        let mut stack: Vec<(usize, Vec<(Label, u32)>)> = vec![(s, vec![])];
        while let Some((cur, evs)) = stack.pop() {
            for e in l.out(cur, dir) {
                if evs.len() + e.events.len() > k {
                    continue;
                }
                let mut next = evs.clone();
                next.extend(e.events.iter().map(|x| (x.label.clone(), x.key.expect("steps carry keys"))));
                let cfg_state = if dir == Dir::Fwd { e.to } else { s };
                let ko = key_order(&l.configs[cfg_state]);
                let mut order = BTreeSet::new();
                for (i, a) in next.iter().enumerate() {
                    for (j, b) in next.iter().enumerate() {
                        if ko.contains(&(a.1, b.1)) {
                            order.insert((i, j));
                        }
                    }
                }
                let labels = next.iter().map(|(lab, _)| lab.clone()).collect();
                out.insert(PomsetMove { dir, pomset: Pomset::new(labels, &order), target: e.to });
                stack.push((e.to, next));
            }
        }
    }
    out.into_iter().collect()
}
