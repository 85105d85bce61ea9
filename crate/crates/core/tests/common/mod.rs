//! Oracles shared by the integration tests. They are written from the
//! definitions and share no code with the library's checkers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rapt::semantics::{Dir, Lts};
use rapt::syntax::parse_term;
use rapt::term::{Signature, Term};

pub fn sig() -> Signature {
    Signature::suite()
}

pub fn t(s: &str) -> Term {
    parse_term(s, &sig()).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Moves of a state as (direction, sorted label names, target).
pub fn moves(l: &Lts, s: usize) -> Vec<(Dir, Vec<String>, usize)> {
    l.edges
        .iter()
        .filter(|e| e.from == s)
        .map(|e| {
            let mut ls: Vec<String> = e.events.iter().map(|x| x.label.as_str().to_string()).collect();
            ls.sort();
            (e.dir, ls, e.to)
        })
        .collect()
}

/// Greatest step bisimulation by naive iteration over all state pairs.
pub fn naive_step_bisim(l1: &Lts, l2: &Lts) -> BTreeSet<(usize, usize)> {
    let mut rel: BTreeSet<(usize, usize)> = (0..l1.len()).flat_map(|a| (0..l2.len()).map(move |b| (a, b))).collect();
    let m1: Vec<_> = (0..l1.len()).map(|s| moves(l1, s)).collect();
    let m2: Vec<_> = (0..l2.len()).map(|s| moves(l2, s)).collect();
    loop {
        let keep: BTreeSet<(usize, usize)> = rel
            .iter()
            .filter(|&&(a, b)| {
                let fwd = m1[a]
                    .iter()
                    .all(|(d, x, a2)| m2[b].iter().any(|(d2, y, b2)| d == d2 && x == y && rel.contains(&(*a2, *b2))));
                let back = m2[b]
                    .iter()
                    .all(|(d, y, b2)| m1[a].iter().any(|(d2, x, a2)| d == d2 && x == y && rel.contains(&(*a2, *b2))));
                fwd && back
            })
            .copied()
            .collect();
        if keep.len() == rel.len() {
            return rel;
        }
        rel = keep;
    }
}

pub fn naive_step_equiv(l1: &Lts, l2: &Lts) -> bool {
    naive_step_bisim(l1, l2).contains(&(l1.initial, l2.initial))
}

/// Checks that `pairs` is a step bisimulation containing the initial pair.
pub fn is_step_bisimulation(l1: &Lts, l2: &Lts, pairs: &[(usize, usize)]) -> bool {
    let rel: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
    if !rel.contains(&(l1.initial, l2.initial)) {
        return false;
    }
    rel.iter().all(|&(a, b)| {
        let (ma, mb) = (moves(l1, a), moves(l2, b));
        ma.iter().all(|(d, x, a2)| mb.iter().any(|(d2, y, b2)| d == d2 && x == y && rel.contains(&(*a2, *b2))))
            && mb.iter().all(|(d, y, b2)| ma.iter().any(|(d2, x, a2)| d == d2 && x == y && rel.contains(&(*a2, *b2))))
    })
}

/// Interleaving expansion of a ∥ of sequential event chains, as a sum of
/// sequences.
pub fn interleave(chains: &[Vec<&str>]) -> Term {
    fn go(chains: &[Vec<&str>], pos: &mut Vec<usize>, cur: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if chains.iter().zip(pos.iter()).all(|(c, &p)| p == c.len()) {
            out.push(cur.clone());
            return;
        }
        for i in 0..chains.len() {
            if pos[i] < chains[i].len() {
                cur.push(chains[i][pos[i]].to_string());
                pos[i] += 1;
                go(chains, pos, cur, out);
                pos[i] -= 1;
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(chains, &mut vec![0; chains.len()], &mut Vec::new(), &mut out);
    let text: Vec<String> = out.iter().map(|seq| seq.join(" . ")).collect();
    t(&text.join(" + "))
}

/// Function symbol of a pattern node: operator name plus parameters.
/// Parameters compare element-wise, label sets as sorted label lists.
fn symbol(t: &Term) -> (String, Vec<(String, u64)>) {
    let key = |k: &Option<u32>| k.map_or(0, |m| u64::from(m) + 1);
    let set = |h: &BTreeSet<rapt::term::Label>| h.iter().map(|l| (l.as_str().to_string(), 0)).collect();
    match t {
        Term::Event(e) => ("event".into(), vec![(e.label.as_str().to_string(), key(&e.key))]),
        Term::Delta => ("delta".into(), vec![]),
        Term::Tau(k) => ("tau".into(), vec![(String::new(), key(k))]),
        Term::Choice(_) => ("+".into(), vec![]),
        Term::Seq(_) => (".".into(), vec![]),
        Term::Par(_) => ("||".into(), vec![]),
        Term::Comm(..) => ("|".into(), vec![]),
        Term::Between(..) => ("&".into(), vec![]),
        Term::ConflictElim(_) => ("theta".into(), vec![]),
        Term::Unless(..) => ("<|".into(), vec![]),
        Term::Encap(h, _) => ("enc".into(), set(h)),
        Term::Abstract(h, _) => ("hide".into(), set(h)),
        Term::RecRef(v, s) => ("ref".into(), vec![(v.clone(), 0), (s.clone(), 0)]),
    }
}

fn is_var(t: &Term) -> bool {
    matches!(t, Term::RecRef(_, s) if s == "?")
}

fn contains(s: &Term, v: &Term) -> bool {
    s == v || s.children().into_iter().any(|c| contains(c, v))
}

/// Textbook lexicographic path order. `prec` maps operator names to ranks
/// (higher is bigger); `<|` compares arguments right to left.
pub fn lpo(s: &Term, t: &Term, prec: &BTreeMap<String, usize>) -> bool {
    if is_var(s) {
        return false;
    }
    if is_var(t) {
        return contains(s, t) && s != t;
    }
    let ss = s.children();
    if ss.iter().any(|si| *si == t || lpo(si, t, prec)) {
        return true;
    }
    let ts = t.children();
    let (fs, ft) = (symbol(s), symbol(t));
    let rank = |f: &(String, Vec<(String, u64)>)| prec.get(&f.0).copied().unwrap_or(0);
    let dominates = ts.iter().all(|tj| lpo(s, tj, prec));
    if rank(&fs) > rank(&ft) || (rank(&fs) == rank(&ft) && fs.0 == ft.0 && fs.1 > ft.1) {
        return dominates;
    }
    if fs == ft {
        let (a, b): (Vec<&Term>, Vec<&Term>) = if fs.0 == "<|" {
            (ss.iter().rev().copied().collect(), ts.iter().rev().copied().collect())
        } else {
            (ss.clone(), ts.clone())
        };
        if !dominates {
            return false;
        }
        for (x, y) in a.iter().zip(b.iter()) {
            if x != y {
                return lpo(x, y, prec);
            }
        }
        return a.len() > b.len();
    }
    false
}

/// Ranks for the library's default precedence, highest first.
pub fn default_ranks() -> BTreeMap<String, usize> {
    let order = ["hide", "enc", "theta", "<|", "|", "&", "||", ".", "+", "tau", "delta", "event", "ref"];
    order.iter().enumerate().map(|(i, o)| (o.to_string(), order.len() - i)).collect()
}
