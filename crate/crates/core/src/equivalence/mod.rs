//! FR equivalence checking on finite LTSs.

mod game;
mod pomset;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::semantics::{build_lts, done, tau_reach, Budget, Dir, Lts, SemanticsError};
use crate::term::{is_std, tau_label, Signature, Term};

pub use game::PlayMove;
pub use pomset::{pomset_moves, Pomset, PomsetMove};

use game::{solve, Attack, Response};
use pomset::key_order;

/// Default cap on hp game positions.
pub const HP_CAP: usize = 1_000_000;
/// Largest LTS (per side) accepted by [`hhp_check`].
pub const HHP_MAX_STATES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("unknown equivalence kind {0}")]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquivKind {
    FrStep,
    FrPomset(usize),
    FrHp,
    FrHhp,
    RbFrStep,
    RbFrPomset(usize),
    RbFrHp,
}

impl EquivKind {
    pub fn is_branching(self) -> bool {
        matches!(self, EquivKind::RbFrStep | EquivKind::RbFrPomset(_) | EquivKind::RbFrHp)
    }

    pub fn pomset_k(self) -> Option<usize> {
        match self {
            EquivKind::FrPomset(k) | EquivKind::RbFrPomset(k) => Some(k),
            _ => None,
        }
    }

    /// Strong kinds, weakest first.
    pub fn strong_hierarchy(k: usize) -> [EquivKind; 4] {
        [EquivKind::FrStep, EquivKind::FrPomset(k), EquivKind::FrHp, EquivKind::FrHhp]
    }
}

impl fmt::Display for EquivKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivKind::FrStep => write!(f, "fr-step"),
            EquivKind::FrPomset(k) => write!(f, "fr-pomset({k})"),
            EquivKind::FrHp => write!(f, "fr-hp"),
            EquivKind::FrHhp => write!(f, "fr-hhp"),
            EquivKind::RbFrStep => write!(f, "rb-fr-step"),
            EquivKind::RbFrPomset(k) => write!(f, "rb-fr-pomset({k})"),
            EquivKind::RbFrHp => write!(f, "rb-fr-hp"),
        }
    }
}

impl FromStr for EquivKind {
    type Err = EquivError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EquivError::UnknownKind(s.to_string());
        let (base, k) = match s.split_once('(') {
            Some((b, rest)) => {
                let k: usize = rest.strip_suffix(')').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                (b, Some(k))
            }
            None => (s, None),
        };
        let k4 = k.unwrap_or(4);
        let kind = match base {
            "fr-step" => EquivKind::FrStep,
            "fr-pomset" => EquivKind::FrPomset(k4),
            "fr-hp" => EquivKind::FrHp,
            "fr-hhp" => EquivKind::FrHhp,
            "rb-fr-step" => EquivKind::RbFrStep,
            "rb-fr-pomset" => EquivKind::RbFrPomset(k4),
            "rb-fr-hp" => EquivKind::RbFrHp,
            _ => return Err(bad()),
        };
        if k.is_some() && kind.pomset_k().is_none() {
            return Err(bad());
        }
        Ok(kind)
    }
}

/// A posetal triple: states and the key bijection between their histories.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HpTriple {
    pub s1: usize,
    pub f: Vec<(u32, u32)>,
    pub s2: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Pairs(Vec<(usize, usize)>),
    Triples(Vec<HpTriple>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub kind: String,
    pub equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Set when the LTSs were cut at a key bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub play: Option<Vec<PlayMove>>,
}

/// Edge as seen by one equivalence kind.
#[derive(Clone, Debug)]
struct VEdge {
    dir: Dir,
    label: String,
    silent: bool,
    to: usize,
    key: u32,
}

struct View<'a> {
    lts: &'a Lts,
    edges: Vec<Vec<VEdge>>,
    tau: [Vec<BTreeSet<usize>>; 2],
    orders: Vec<BTreeSet<(u32, u32)>>,
}

fn dir_ix(d: Dir) -> usize {
    match d {
        Dir::Fwd => 0,
        Dir::Rev => 1,
    }
}

fn join_labels(ls: &[crate::term::Label]) -> String {
    let v: Vec<&str> = ls.iter().map(|l| l.as_str()).collect();
    format!("{{{}}}", v.join(","))
}

impl<'a> View<'a> {
    fn new(lts: &'a Lts, kind: EquivKind) -> View<'a> {
        let weak = kind.is_branching();
        let edges = (0..lts.len())
            .map(|s| match kind.pomset_k() {
                Some(k) => pomset_moves(lts, s, k)
                    .into_iter()
                    .map(|m| {
                        let p = if weak { m.pomset.visible() } else { m.pomset };
                        VEdge { dir: m.dir, silent: weak && p.is_empty(), label: p.render(), to: m.target, key: 0 }
                    })
                    .collect(),
                None => lts
                    .fwd(s)
                    .chain(lts.rev(s))
                    .map(|e| {
                        let ls = if weak { e.visible() } else { e.labels() };
                        VEdge {
                            dir: e.dir,
                            silent: weak && ls.is_empty(),
                            label: join_labels(&ls),
                            to: e.to,
                            key: e.events[0].key.expect("steps carry keys"),
                        }
                    })
                    .collect(),
            })
            .collect();
        let needs_order = matches!(kind, EquivKind::FrHp | EquivKind::FrHhp | EquivKind::RbFrHp);
        let orders = if needs_order { lts.configs.iter().map(key_order).collect() } else { vec![] };
        View { lts, edges, tau: [tau_reach(lts, Dir::Fwd), tau_reach(lts, Dir::Rev)], orders }
    }

    /// Cut at the key bound. Pairs with a cut state are not explored, and a
    /// silent path into one answers any attack.
    fn cut(&self, s: usize) -> bool {
        self.lts.frontier.contains(&s)
    }

    fn terminal(&self, s: usize, d: Dir) -> bool {
        match d {
            Dir::Fwd => done(&self.lts.states[s]),
            Dir::Rev => is_std(&self.lts.states[s]),
        }
    }
}

fn mv(role: &'static str, side: u8, e: &VEdge, from: usize) -> PlayMove {
    PlayMove { role, side, dir: e.dir, label: e.label.clone(), from, to: e.to }
}

fn term_move(role: &'static str, side: u8, d: Dir, s: usize) -> PlayMove {
    let label = if d == Dir::Fwd { "terminated" } else { "initial" };
    PlayMove { role, side, dir: d, label: label.to_string(), from: s, to: s }
}

/// Orders a pair as (state in LTS 1, state in LTS 2).
fn orient(side: u8, att: usize, def: usize) -> (usize, usize) {
    if side == 1 {
        (att, def)
    } else {
        (def, att)
    }
}

fn strong_pairs(v1: &View, v2: &View) -> Result<game::Solved<(usize, usize)>, EquivError> {
    solve((v1.lts.initial, v2.lts.initial), HP_CAP, |&(s, t)| {
        let mut out = Vec::new();
        if v1.cut(s) || v2.cut(t) {
            return out;
        }
        for (side, a, d, va, vd) in [(1u8, s, t, v1, v2), (2u8, t, s, v2, v1)] {
            for e in &va.edges[a] {
                let responses = vd.edges[d]
                    .iter()
                    .filter(|e2| e2.dir == e.dir && e2.label == e.label)
                    .map(|e2| Response {
                        moves: vec![mv("defender", 3 - side, e2, d)],
                        required: vec![orient(side, e.to, e2.to)],
                    })
                    .collect();
                out.push(Attack { mv: mv("attacker", side, e, a), responses });
            }
        }
        out
    })
}

/// Rooted branching game; `root` marks the start position.
fn branching_pairs(v1: &View, v2: &View) -> Result<game::Solved<(usize, usize, bool)>, EquivError> {
    solve((v1.lts.initial, v2.lts.initial, true), HP_CAP, |&(s, t, root)| {
        let mut out = Vec::new();
        if v1.cut(s) || v2.cut(t) {
            return out;
        }
        for (side, a, d, va, vd) in [(1u8, s, t, v1, v2), (2u8, t, s, v2, v1)] {
            for dir in [Dir::Fwd, Dir::Rev] {
                if va.terminal(a, dir) {
                    let cands: Vec<usize> =
                        if root { vec![d] } else { vd.tau[dir_ix(dir)][d].iter().copied().collect() };
                    let responses = cands
                        .into_iter()
                        .filter(|&d0| vd.terminal(d0, dir) || vd.cut(d0))
                        .map(|d0| Response {
                            moves: vec![],
                            required: if d0 == d {
                                vec![]
                            } else {
                                let (x, y) = orient(side, a, d0);
                                vec![(x, y, false)]
                            },
                        })
                        .collect();
                    out.push(Attack { mv: term_move("attacker", side, dir, a), responses });
                }
            }
            for e in &va.edges[a] {
                let mut responses = Vec::new();
                if root {
                    for e2 in vd.edges[d].iter().filter(|e2| e2.dir == e.dir && e2.label == e.label) {
                        let (x, y) = orient(side, e.to, e2.to);
                        responses.push(Response {
                            moves: vec![mv("defender", 3 - side, e2, d)],
                            required: vec![(x, y, false)],
                        });
                    }
                } else {
                    if e.silent {
                        let (x, y) = orient(side, e.to, d);
                        responses.push(Response { moves: vec![], required: vec![(x, y, false)] });
                    }
                    let tau = &vd.tau[dir_ix(e.dir)];
                    for &d0 in tau[d].iter().filter(|&&d0| vd.cut(d0)) {
                        let (x, y) = orient(side, a, d0);
                        responses.push(Response { moves: vec![], required: vec![(x, y, false)] });
                    }
                    for &d0 in &tau[d] {
                        for e2 in vd.edges[d0].iter().filter(|e2| e2.dir == e.dir && e2.label == e.label) {
                            for &d1 in &tau[e2.to] {
                                let (x0, y0) = orient(side, a, d0);
                                let (x1, y1) = orient(side, e.to, d1);
                                let mut required = vec![(x1, y1, false)];
                                if d0 != d {
                                    required.push((x0, y0, false));
                                }
                                let mut m2 = mv("defender", 3 - side, e2, d0);
                                m2.to = d1;
                                responses.push(Response { moves: vec![m2], required });
                            }
                        }
                    }
                }
                out.push(Attack { mv: mv("attacker", side, e, a), responses });
            }
        }
        out
    })
}

type Triple = (usize, Vec<(u32, u32)>, usize, bool);

fn lookup(f: &[(u32, u32)], side: u8, k: u32) -> Option<u32> {
    if side == 1 {
        f.iter().find(|p| p.0 == k).map(|p| p.1)
    } else {
        f.iter().find(|p| p.1 == k).map(|p| p.0)
    }
}

fn extend(f: &[(u32, u32)], pair: (u32, u32)) -> Vec<(u32, u32)> {
    let mut g = f.to_vec();
    g.push(pair);
    g.sort();
    g
}

fn shrink(f: &[(u32, u32)], pair: (u32, u32)) -> Vec<(u32, u32)> {
    f.iter().copied().filter(|p| *p != pair).collect()
}

/// Order-isomorphism of `f ∪ {k1 ↦ k2}` between states `s1` and `s2`.
fn iso_ok(v1: &View, s1: usize, k1: u32, v2: &View, s2: usize, k2: u32, f: &[(u32, u32)]) -> bool {
    let (o1, o2) = (&v1.orders[s1], &v2.orders[s2]);
    f.iter()
        .all(|&(a, b)| o1.contains(&(a, k1)) == o2.contains(&(b, k2)) && o1.contains(&(k1, a)) == o2.contains(&(k2, b)))
}

/// Label-preserving order-isomorphisms between the histories already present
/// in the two initial states. Silent keys are skipped for branching kinds.
fn initial_maps(v1: &View, v2: &View, weak: bool) -> Vec<Vec<(u32, u32)>> {
    let blocks = |v: &View| -> BTreeMap<u32, Vec<String>> {
        let cfg = v.lts.configs[v.lts.initial].clone();
        let mut m: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for (l, k) in cfg.events {
            m.entry(k).or_default().push(l.as_str().to_string());
        }
        let tau = tau_label();
        m.into_iter()
            .filter_map(|(k, mut ls)| {
                if weak {
                    ls.retain(|l| l != tau.as_str());
                }
                ls.sort();
                (!ls.is_empty()).then_some((k, ls))
            })
            .collect()
    };
    let (b1, b2) = (blocks(v1), blocks(v2));
    if b1.len() != b2.len() {
        return vec![];
    }
    let k1: Vec<u32> = b1.keys().copied().collect();
    let k2: Vec<u32> = b2.keys().copied().collect();
    let (o1, o2) = (&v1.orders[v1.lts.initial], &v2.orders[v2.lts.initial]);
    let mut out = Vec::new();
    let mut used = vec![false; k2.len()];
    let mut cur: Vec<(u32, u32)> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        k1: &[u32],
        k2: &[u32],
        b1: &BTreeMap<u32, Vec<String>>,
        b2: &BTreeMap<u32, Vec<String>>,
        o1: &BTreeSet<(u32, u32)>,
        o2: &BTreeSet<(u32, u32)>,
        used: &mut [bool],
        cur: &mut Vec<(u32, u32)>,
        out: &mut Vec<Vec<(u32, u32)>>,
    ) {
        if i == k1.len() {
            let mut f = cur.clone();
            f.sort();
            out.push(f);
            return;
        }
        for j in 0..k2.len() {
            if used[j] || b1[&k1[i]] != b2[&k2[j]] {
                continue;
            }
            let ok = cur.iter().all(|&(a, b)| {
                o1.contains(&(a, k1[i])) == o2.contains(&(b, k2[j]))
                    && o1.contains(&(k1[i], a)) == o2.contains(&(k2[j], b))
            });
            if !ok {
                continue;
            }
            used[j] = true;
            cur.push((k1[i], k2[j]));
            go(i + 1, k1, k2, b1, b2, o1, o2, used, cur, out);
            cur.pop();
            used[j] = false;
        }
    }
    go(0, &k1, &k2, &b1, &b2, o1, o2, &mut used, &mut cur, &mut out);
    out
}

fn hp_triples(v1: &View, v2: &View, branching: bool, f0: Vec<(u32, u32)>) -> Result<game::Solved<Triple>, EquivError> {
    let start: Triple = (v1.lts.initial, f0, v2.lts.initial, branching);
    solve(start, HP_CAP, |(s, f, t, root)| {
        let (s, t, root) = (*s, *t, *root);
        let mut out = Vec::new();
        if v1.cut(s) || v2.cut(t) {
            return out;
        }
        let weak = branching && !root;
        for (side, a, d, va, vd) in [(1u8, s, t, v1, v2), (2u8, t, s, v2, v1)] {
            let pos = |att: usize, g: Vec<(u32, u32)>, def: usize| -> Triple {
                let (x, y) = orient(side, att, def);
                (x, g, y, false)
            };
            if branching {
                for dir in [Dir::Fwd, Dir::Rev] {
                    if va.terminal(a, dir) {
                        let cands: Vec<usize> =
                            if root { vec![d] } else { vd.tau[dir_ix(dir)][d].iter().copied().collect() };
                        let responses = cands
                            .into_iter()
                            .filter(|&d0| vd.terminal(d0, dir) || vd.cut(d0))
                            .map(|d0| Response {
                                moves: vec![],
                                required: if d0 == d { vec![] } else { vec![pos(a, f.clone(), d0)] },
                            })
                            .collect();
                        out.push(Attack { mv: term_move("attacker", side, dir, a), responses });
                    }
                }
            }
            for e in &va.edges[a] {
                let mut responses = Vec::new();
                if weak && e.silent {
                    responses.push(Response { moves: vec![], required: vec![pos(e.to, f.clone(), d)] });
                }
                let starts: Vec<usize> =
                    if weak { vd.tau[dir_ix(e.dir)][d].iter().copied().collect() } else { vec![d] };
                if weak {
                    for &d0 in starts.iter().filter(|&&d0| vd.cut(d0)) {
                        responses.push(Response { moves: vec![], required: vec![pos(a, f.clone(), d0)] });
                    }
                }
                for d0 in starts {
                    for e2 in vd.edges[d0].iter().filter(|e2| e2.dir == e.dir && e2.label == e.label) {
                        let g = if e.silent {
                            Some(f.clone())
                        } else {
                            let pair = if side == 1 { (e.key, e2.key) } else { (e2.key, e.key) };
                            match e.dir {
                                Dir::Fwd => {
                                    let ok = if side == 1 {
                                        iso_ok(va, e.to, e.key, vd, e2.to, e2.key, f)
                                    } else {
                                        iso_ok(vd, e2.to, e2.key, va, e.to, e.key, f)
                                    };
                                    ok.then(|| extend(f, pair))
                                }
                                Dir::Rev => (lookup(f, side, e.key) == Some(e2.key)).then(|| shrink(f, pair)),
                            }
                        };
                        let Some(g) = g else { continue };
                        let ends: Vec<usize> =
                            if weak { vd.tau[dir_ix(e.dir)][e2.to].iter().copied().collect() } else { vec![e2.to] };
                        for d1 in ends {
                            let mut required = vec![pos(e.to, g.clone(), d1)];
                            if d0 != d {
                                required.push(pos(a, f.clone(), d0));
                            }
                            let mut m2 = mv("defender", 3 - side, e2, d0);
                            m2.to = d1;
                            responses.push(Response { moves: vec![m2], required });
                        }
                    }
                }
                out.push(Attack { mv: mv("attacker", side, e, a), responses });
            }
        }
        out
    })
}

fn bound_of(l1: &Lts, l2: &Lts) -> Option<u32> {
    if l1.frontier.is_empty() && l2.frontier.is_empty() {
        None
    } else {
        let m = |l: &Lts| l.frontier.iter().map(|&s| l.states[s].max_key()).max().unwrap_or(0);
        Some(m(l1).max(m(l2)))
    }
}

fn verdict_pairs(kind: EquivKind, won: bool, pairs: Vec<(usize, usize)>, play: Vec<PlayMove>) -> Verdict {
    Verdict {
        kind: kind.to_string(),
        equivalent: won,
        k: kind.pomset_k(),
        bounded: None,
        witness: won.then_some(Witness::Pairs(pairs)),
        play: (!won).then_some(play),
    }
}

/// Decides `kind` between the initial states of two LTSs.
pub fn check(l1: &Lts, l2: &Lts, kind: EquivKind) -> Result<Verdict, EquivError> {
    let mut v = match kind {
        EquivKind::FrStep | EquivKind::FrPomset(_) => {
            let (v1, v2) = (View::new(l1, kind), View::new(l2, kind));
            let g = strong_pairs(&v1, &v2)?;
            verdict_pairs(kind, g.won(), g.relation(), g.play())
        }
        EquivKind::RbFrStep | EquivKind::RbFrPomset(_) => {
            let (v1, v2) = (View::new(l1, kind), View::new(l2, kind));
            let g = branching_pairs(&v1, &v2)?;
            let pairs: BTreeSet<(usize, usize)> = g.relation().into_iter().map(|(s, t, _)| (s, t)).collect();
            verdict_pairs(kind, g.won(), pairs.into_iter().collect(), g.play())
        }
        EquivKind::FrHp => hp_game(l1, l2, false)?,
        EquivKind::RbFrHp => hp_game(l1, l2, true)?,
        EquivKind::FrHhp => hhp_check(l1, l2)?,
    };
    v.bounded = bound_of(l1, l2);
    Ok(v)
}

fn triples_of(rel: Vec<Triple>) -> Vec<HpTriple> {
    let set: BTreeSet<HpTriple> = rel.into_iter().map(|(s1, f, s2, _)| HpTriple { s1, f, s2 }).collect();
    set.into_iter().collect()
}

/// History-preserving game over posetal triples.
pub fn hp_game(l1: &Lts, l2: &Lts, rooted_branching: bool) -> Result<Verdict, EquivError> {
    let kind = if rooted_branching { EquivKind::RbFrHp } else { EquivKind::FrHp };
    let (v1, v2) = (View::new(l1, kind), View::new(l2, kind));
    let mut first_play = None;
    for f0 in initial_maps(&v1, &v2, rooted_branching) {
        let g = hp_triples(&v1, &v2, rooted_branching, f0)?;
        if g.won() {
            return Ok(Verdict {
                kind: kind.to_string(),
                equivalent: true,
                k: None,
                bounded: None,
                witness: Some(Witness::Triples(triples_of(g.relation()))),
                play: None,
            });
        }
        first_play.get_or_insert_with(|| g.play());
    }
    Ok(Verdict {
        kind: kind.to_string(),
        equivalent: false,
        k: None,
        bounded: None,
        witness: None,
        play: Some(first_play.unwrap_or_default()),
    })
}

/// Hereditary hp: the hp relation pruned until it is downward closed, i.e.
/// every undo of a maximal event on one side is matched inside the relation.
pub fn hhp_check(l1: &Lts, l2: &Lts) -> Result<Verdict, EquivError> {
    if l1.len() > HHP_MAX_STATES || l2.len() > HHP_MAX_STATES {
        return Err(EquivError::BudgetExceeded(format!("hhp limited to {HHP_MAX_STATES} states per side")));
    }
    let hp = hp_game(l1, l2, false)?;
    if !hp.equivalent {
        return Ok(Verdict { kind: EquivKind::FrHhp.to_string(), ..hp });
    }
    let Some(Witness::Triples(rel)) = hp.witness else { unreachable!("hp witness holds triples") };
    let mut rel: BTreeSet<HpTriple> = rel.into_iter().collect();
    loop {
        let bad: Vec<HpTriple> = rel.iter().filter(|t| !downward_ok(l1, l2, t, &rel)).cloned().collect();
        if bad.is_empty() {
            break;
        }
        for b in bad {
            rel.remove(&b);
        }
    }
    let won = rel.iter().any(|t| t.s1 == l1.initial && t.s2 == l2.initial);
    Ok(Verdict {
        kind: EquivKind::FrHhp.to_string(),
        equivalent: won,
        k: None,
        bounded: None,
        witness: won.then(|| Witness::Triples(rel.into_iter().collect())),
        play: (!won).then(Vec::new),
    })
}

fn downward_ok(l1: &Lts, l2: &Lts, t: &HpTriple, rel: &BTreeSet<HpTriple>) -> bool {
    let f: BTreeMap<u32, u32> = t.f.iter().copied().collect();
    let finv: BTreeMap<u32, u32> = t.f.iter().map(|&(a, b)| (b, a)).collect();
    let side = |la: &Lts, lb: &Lts, a: usize, b: usize, map: &BTreeMap<u32, u32>, flip: bool| {
        la.rev(a).all(|e| {
            let k = e.events[0].key.expect("keyed");
            let Some(&k2) = map.get(&k) else { return false };
            lb.rev(b).any(|e2| {
                e2.events[0].key == Some(k2) && e2.labels() == e.labels() && {
                    let pair = if flip { (k2, k) } else { (k, k2) };
                    let g = shrink(&t.f, pair);
                    let cand = if flip {
                        HpTriple { s1: e2.to, f: g, s2: e.to }
                    } else {
                        HpTriple { s1: e.to, f: g, s2: e2.to }
                    };
                    rel.contains(&cand)
                }
            })
        })
    };
    side(l1, l2, t.s1, t.s2, &f, false) && side(l2, l1, t.s2, t.s1, &finv, true)
}

/// Builds both LTSs and checks them.
pub fn check_terms(t1: &Term, t2: &Term, sig: &Signature, kind: EquivKind, b: Budget) -> Result<Verdict, EquivError> {
    let l1 = build_lts(t1, sig, b)?;
    let l2 = build_lts(t2, sig, b)?;
    check(&l1, &l2, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn eq(a: &str, b: &str, kind: EquivKind) -> bool {
        let sig = Signature::suite();
        let t1 = parse_term(a, &sig).unwrap();
        let t2 = parse_term(b, &sig).unwrap();
        check_terms(&t1, &t2, &sig, kind, Budget::default()).unwrap().equivalent
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ["fr-step", "fr-pomset(4)", "fr-hp", "fr-hhp", "rb-fr-step", "rb-fr-pomset(2)", "rb-fr-hp"] {
            assert_eq!(k.parse::<EquivKind>().unwrap().to_string(), k);
        }
        assert_eq!("fr-pomset".parse::<EquivKind>().unwrap(), EquivKind::FrPomset(4));
        assert!("fr-step(2)".parse::<EquivKind>().is_err());
    }

    #[test]
    fn examples() {
        assert!(eq("a + a", "a", EquivKind::FrStep));
        assert!(!eq("a || b", "a . b + b . a", EquivKind::FrStep));
        assert!(eq("a . tau", "a", EquivKind::RbFrStep));
        assert!(!eq("a . tau", "a", EquivKind::FrStep));
        assert!(!eq("a . (b + c)", "a . b + a . c", EquivKind::FrHp));
        assert!(eq("a || b", "b || a", EquivKind::FrHp));
        assert!(eq("a || b", "b || a", EquivKind::FrHhp));
    }

    #[test]
    fn play_for_label_mismatch() {
        let sig = Signature::suite();
        let t1 = parse_term("a . b", &sig).unwrap();
        let t2 = parse_term("a . c", &sig).unwrap();
        let v = check_terms(&t1, &t2, &sig, EquivKind::FrStep, Budget::default()).unwrap();
        let play = v.play.unwrap();
        assert_eq!(play[0].label, "{a}");
        assert_eq!(play.last().unwrap().role, "attacker");
        assert_eq!(play.len(), 3);
    }

    #[test]
    fn pomset_moves_examples() {
        let sig = Signature::suite();
        let l = build_lts(&parse_term("a . b", &sig).unwrap(), &sig, Budget::default()).unwrap();
        let ms = pomset_moves(&l, l.initial, 2);
        assert!(ms.iter().any(|m| m.pomset.render() == "{a,b | 0<1}"));
        let l = build_lts(&parse_term("a || b", &sig).unwrap(), &sig, Budget::default()).unwrap();
        let ms = pomset_moves(&l, l.initial, 2);
        assert!(ms.iter().any(|m| m.pomset.render() == "{a,b}"));
        let ms = pomset_moves(&l, l.initial, 1);
        assert!(ms.is_empty());
    }
}
