use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::recursion::RecSpec;
use crate::rewriter::{normal_form, normal_form_open, Mode};
use crate::syntax::render;
use crate::term::{
    canonicalize, configuration_any, is_std, tau_label, Configuration, EventInstance, Label, Signature, Term,
};

use super::sos::{done, Sos};
use super::{LtsOptions, SemanticsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Fwd,
    Rev,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub dir: Dir,
    pub events: Vec<EventInstance>,
}

impl Edge {
    pub fn is_tau_only(&self) -> bool {
        self.events.iter().all(|e| e.label == tau_label())
    }

    /// Labels without keys, sorted.
    pub fn labels(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.events.iter().map(|e| e.label.clone()).collect();
        v.sort();
        v
    }

    /// Non-τ labels, sorted.
    pub fn visible(&self) -> Vec<Label> {
        let t = tau_label();
        self.labels().into_iter().filter(|l| *l != t).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<Term>,
    pub edges: Vec<Edge>,
    pub initial: usize,
    /// States whose forward moves were cut at the key bound.
    pub frontier: BTreeSet<usize>,
    /// Executed events of each state with their causal order.
    pub configs: Vec<Configuration>,
    fwd_adj: Vec<Vec<usize>>,
    rev_adj: Vec<Vec<usize>>,
}

impl Lts {
    pub(crate) fn from_parts(
        states: Vec<Term>,
        edges: Vec<Edge>,
        initial: usize,
        frontier: BTreeSet<usize>,
        configs: Vec<Configuration>,
    ) -> Lts {
        let mut fwd_adj = vec![Vec::new(); states.len()];
        let mut rev_adj = vec![Vec::new(); states.len()];
        for (i, e) in edges.iter().enumerate() {
            match e.dir {
                Dir::Fwd => fwd_adj[e.from].push(i),
                Dir::Rev => rev_adj[e.from].push(i),
            }
        }
        Lts { states, edges, initial, frontier, configs, fwd_adj, rev_adj }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn fwd(&self, s: usize) -> impl Iterator<Item = &Edge> {
        self.fwd_adj[s].iter().map(move |&i| &self.edges[i])
    }

    pub fn rev(&self, s: usize) -> impl Iterator<Item = &Edge> {
        self.rev_adj[s].iter().map(move |&i| &self.edges[i])
    }

    pub fn out(&self, s: usize, dir: Dir) -> Box<dyn Iterator<Item = &Edge> + '_> {
        match dir {
            Dir::Fwd => Box::new(self.fwd(s)),
            Dir::Rev => Box::new(self.rev(s)),
        }
    }

    pub fn is_fwd_terminal(&self, s: usize) -> bool {
        done(&self.states[s])
    }

    pub fn is_rev_terminal(&self, s: usize) -> bool {
        is_std(&self.states[s])
    }

    pub fn terminals(&self) -> Vec<usize> {
        (0..self.len()).filter(|&s| self.is_fwd_terminal(s)).collect()
    }

    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                json!({
                    "from": e.from,
                    "to": e.to,
                    "dir": e.dir,
                    "events": e.events.iter().map(|x| {
                        let key = if e.dir == Dir::Rev { x.key } else { None };
                        json!({"label": x.label, "key": key})
                    }).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "states": self.states.iter().map(render).collect::<Vec<_>>(),
            "edges": edges,
            "initial": self.initial,
            "terminals": self.terminals(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n  rankdir=LR;\n");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if i == self.initial {
                "doublecircle"
            } else if self.is_fwd_terminal(i) {
                "box"
            } else {
                "ellipse"
            };
            out.push_str(&format!("  s{} [label={:?}, shape={}];\n", i, render(s), shape));
        }
        for e in &self.edges {
            let lab: Vec<String> = e
                .events
                .iter()
                .map(|x| match (e.dir, x.key) {
                    (Dir::Rev, Some(k)) => format!("{}[{}]", x.label, k),
                    _ => x.label.to_string(),
                })
                .collect();
            let style = if e.dir == Dir::Fwd { "solid" } else { "dashed" };
            out.push_str(&format!("  s{} -> s{} [label=\"{{{}}}\", style={}];\n", e.from, e.to, lab.join(","), style));
        }
        out.push_str("}\n");
        out
    }
}

/// A weak move `τ* X τ*` with `X` holding at least one visible event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeakEdge {
    pub from: usize,
    pub to: usize,
    pub dir: Dir,
    pub labels: Vec<Label>,
}

pub(crate) fn tau_reach(l: &Lts, dir: Dir) -> Vec<BTreeSet<usize>> {
    (0..l.len())
        .map(|s| {
            let mut seen = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for e in l.out(u, dir) {
                    if e.is_tau_only() && seen.insert(e.to) {
                        stack.push(e.to);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Weak edges in both directions.
pub fn weak_closure(l: &Lts) -> Vec<WeakEdge> {
    let mut out = BTreeSet::new();
    for dir in [Dir::Fwd, Dir::Rev] {
        let reach = tau_reach(l, dir);
        for s in 0..l.len() {
            for &u in &reach[s] {
                for e in l.out(u, dir) {
                    if e.is_tau_only() {
                        continue;
                    }
                    for &v in &reach[e.to] {
                        out.insert(WeakEdge { from: s, to: v, dir, labels: e.visible() });
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

struct Explorer<'a> {
    sig: &'a Signature,
    specs: &'a BTreeMap<String, RecSpec>,
}

impl Explorer<'_> {
    fn unfold(&self, t: &Term) -> Result<Term, SemanticsError> {
        Ok(match t {
            Term::RecRef(x, s) => {
                let spec = self.specs.get(s).ok_or_else(|| SemanticsError::UnknownSpec(s.clone()))?;
                spec.body(x).cloned().ok_or_else(|| SemanticsError::UnknownVariable(x.clone()))?
            }
            Term::Seq(v) => {
                let mut items = Vec::with_capacity(v.len());
                let mut active = true;
                for c in v {
                    if active {
                        items.push(self.unfold(c)?);
                        active = done(c);
                    } else {
                        items.push(c.clone());
                    }
                }
                Term::Seq(items)
            }
            _ => {
                let kids = t.children().into_iter().map(|c| self.unfold(c)).collect::<Result<Vec<_>, _>>()?;
                if kids.is_empty() {
                    t.clone()
                } else {
                    t.with_children(kids)
                }
            }
        })
    }

    /// Unfolds recursion references in active positions until none is left.
    fn prepare(&self, t: Term) -> Result<Term, SemanticsError> {
        let mut t = t;
        for _ in 0..64 {
            if !active_recref(&t) {
                return Ok(t);
            }
            t = normal_form_open(&self.unfold(&t)?, self.sig, Mode::Strong)?;
        }
        Err(SemanticsError::Unguarded)
    }
}

fn active_recref(t: &Term) -> bool {
    match t {
        Term::RecRef(..) => true,
        Term::Seq(v) => {
            for c in v {
                if active_recref(c) {
                    return true;
                }
                if !done(c) {
                    return false;
                }
            }
            false
        }
        _ => t.children().into_iter().any(active_recref),
    }
}

pub(crate) fn explore(
    t: &Term,
    sig: &Signature,
    specs: &BTreeMap<String, RecSpec>,
    opts: &LtsOptions,
) -> Result<Lts, SemanticsError> {
    let ex = Explorer { sig, specs };
    let sos = Sos { sig, gap_fill: !opts.strict_paper_sos };
    let start = if t.has_recref() {
        ex.prepare(normal_form_open(t, sig, Mode::Strong)?)?
    } else if opts.normalize {
        normal_form(t, sig, Mode::Strong)?
    } else {
        canonicalize(t)
    };
    let rewritten = has_eliminable(&start);
    let mut states = vec![start.clone()];
    let mut index: HashMap<Term, usize> = HashMap::from([(start, 0)]);
    let mut edges = Vec::new();
    let mut frontier = BTreeSet::new();
    // Unfolding recursion or eliminating an operator on the way forward means
    // a reverse step exposes a rewritten copy of its source; undoing a
    // recorded forward step returns to the source itself.
    let recursive = t.has_recref() || !specs.is_empty() || rewritten;
    let mut undone: HashMap<usize, BTreeSet<Vec<EventInstance>>> = HashMap::new();
    let mut queue = VecDeque::from([0usize]);
    let max_states = opts.budget.max_states;
    let mut intern = |t: Term, states: &mut Vec<Term>, queue: &mut VecDeque<usize>| -> Result<usize, SemanticsError> {
        if let Some(&i) = index.get(&t) {
            return Ok(i);
        }
        if states.len() >= max_states {
            return Err(SemanticsError::StateLimitExceeded(max_states));
        }
        states.push(t.clone());
        index.insert(t, states.len() - 1);
        queue.push_back(states.len() - 1);
        Ok(states.len() - 1)
    };
    while let Some(s) = queue.pop_front() {
        let cur = states[s].clone();
        let k = cur.max_key() + 1;
        let fwd = sos.fwd(&cur, k);
        if !fwd.is_empty() && k > opts.budget.max_key {
            if opts.truncate {
                frontier.insert(s);
            } else {
                return Err(SemanticsError::KeyLimitExceeded(opts.budget.max_key));
            }
        } else {
            for st in fwd {
                let target = if st.target.has_recref() { ex.prepare(st.target)? } else { st.target };
                let to = intern(target, &mut states, &mut queue)?;
                if recursive {
                    edges.push(Edge { from: to, to: s, dir: Dir::Rev, events: st.events.clone() });
                    undone.entry(to).or_default().insert(st.events.clone());
                }
                edges.push(Edge { from: s, to, dir: Dir::Fwd, events: st.events });
            }
        }
        for st in sos.rev(&cur) {
            if undone.get(&s).is_some_and(|u| u.contains(&st.events)) {
                continue;
            }
            let target = if st.target.has_recref() { ex.prepare(st.target)? } else { st.target };
            let to = intern(target, &mut states, &mut queue)?;
            edges.push(Edge { from: s, to, dir: Dir::Rev, events: st.events });
        }
    }
    edges.sort_by_key(|e| (e.from, e.dir == Dir::Rev));
    let configs = states.iter().map(|t| state_config(t, sig)).collect();
    Ok(Lts::from_parts(states, edges, 0, frontier, configs))
}

/// Configuration of a state, read off its basic form when it still holds
/// operators that merge or drop events.
fn has_eliminable(t: &Term) -> bool {
    let mut found = false;
    t.walk(&mut |u| {
        found |= matches!(
            u,
            Term::Comm(..)
                | Term::Between(..)
                | Term::ConflictElim(_)
                | Term::Unless(..)
                | Term::Encap(..)
                | Term::Abstract(..)
        )
    });
    found
}

fn state_config(t: &Term, sig: &Signature) -> Configuration {
    let mut raw = false;
    t.walk(&mut |u| raw |= matches!(u, Term::Comm(..) | Term::Between(..) | Term::ConflictElim(_) | Term::Unless(..)));
    let basic = if raw { normal_form_open(t, sig, Mode::Strong).ok() } else { None };
    configuration_any(basic.as_ref().unwrap_or(t))
}
