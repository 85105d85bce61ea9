//! Forward and reverse transition rules.

use std::collections::BTreeSet;

use crate::rewriter::{comm_atoms, normal_form_open, Mode};
use crate::term::{canonicalize_root, is_std, tau_label, EventInstance, Label, Signature, Term};

/// One transition: the events fired (or undone) and the successor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Step {
    pub events: Vec<EventInstance>,
    pub target: Term,
}

fn step(mut events: Vec<EventInstance>, target: Term) -> Step {
    events.sort();
    Step { events, target }
}

fn tau_ev(key: Option<u32>) -> EventInstance {
    EventInstance { label: tau_label(), key }
}

/// Forward-terminated on the live projection: every live event executed.
/// Unexecuted branches of a committed choice are ignored. δ is never done.
pub fn done(t: &Term) -> bool {
    match t {
        Term::Event(e) => e.key.is_some(),
        Term::Tau(k) => k.is_some(),
        Term::Delta | Term::RecRef(..) => false,
        Term::Seq(v) | Term::Par(v) => v.iter().all(done),
        Term::Choice(v) => {
            let live: Vec<&Term> = v.iter().filter(|c| !is_std(c)).collect();
            !live.is_empty() && live.into_iter().all(done)
        }
        Term::Comm(x, y) | Term::Between(x, y) => done(x) && done(y),
        Term::Unless(x, _) | Term::ConflictElim(x) | Term::Encap(_, x) | Term::Abstract(_, x) => done(x),
    }
}

pub(crate) struct Sos<'a> {
    pub sig: &'a Signature,
    pub gap_fill: bool,
}

fn replace(v: &[Term], i: usize, t: Term) -> Vec<Term> {
    let mut out = v.to_vec();
    out[i] = t;
    out
}

fn step_key(s: &Step) -> Option<u32> {
    s.events.first().and_then(|e| e.key)
}

fn has_key(t: &Term, k: u32) -> bool {
    let mut hit = false;
    t.walk(&mut |s| match s {
        Term::Event(e) if e.key == Some(k) => hit = true,
        Term::Tau(Some(m)) if *m == k => hit = true,
        _ => {}
    });
    hit
}

fn hide_events(i: &BTreeSet<Label>, evs: &[EventInstance]) -> Vec<EventInstance> {
    evs.iter().map(|e| if i.contains(&e.label) { tau_ev(e.key) } else { e.clone() }).collect()
}

impl Sos<'_> {
    /// Local elimination of `|`, `&`, Θ and `<|` by the axioms.
    fn eliminate(&self, t: &Term) -> Option<Term> {
        match normal_form_open(t, self.sig, Mode::Strong) {
            Ok(n) if n != *t => Some(n),
            _ => None,
        }
    }

    pub fn fwd(&self, t: &Term, k: u32) -> Vec<Step> {
        let mut out = match t {
            Term::Event(e) if e.key.is_none() => {
                let h = EventInstance { label: e.label.clone(), key: Some(k) };
                vec![step(vec![h.clone()], Term::Event(h))]
            }
            Term::Tau(None) => vec![step(vec![tau_ev(Some(k))], Term::Tau(Some(k)))],
            Term::Event(_) | Term::Tau(_) | Term::Delta | Term::RecRef(..) => vec![],
            Term::Choice(v) => {
                let mut out = Vec::new();
                for i in 0..v.len() {
                    if v.iter().enumerate().all(|(j, c)| j == i || is_std(c)) {
                        for s in self.fwd(&v[i], k) {
                            out.push(step(s.events, canonicalize_root(&Term::Choice(replace(v, i, s.target)))));
                        }
                    }
                }
                out
            }
            Term::Seq(v) => match v.iter().position(|c| !done(c)) {
                Some(i) if i == 0 || self.gap_fill => self
                    .fwd(&v[i], k)
                    .into_iter()
                    .map(|s| step(s.events, canonicalize_root(&Term::Seq(replace(v, i, s.target)))))
                    .collect(),
                _ => vec![],
            },
            Term::Par(v) => self.par_fwd(v, k),
            Term::Encap(h, x) => self
                .fwd(x, k)
                .into_iter()
                .filter(|s| s.events.iter().all(|e| !h.contains(&e.label)))
                .map(|s| step(s.events, Term::encap(h.clone(), s.target)))
                .collect(),
            Term::Abstract(i, x) => self
                .fwd(x, k)
                .into_iter()
                .map(|s| step(hide_events(i, &s.events), Term::hide(i.clone(), s.target)))
                .collect(),
            Term::Between(x, y) => match self.eliminate(t) {
                Some(n) => self.fwd(&n, k),
                None => {
                    let mut out = self.fwd(&Term::par(vec![(**x).clone(), (**y).clone()]), k);
                    out.extend(self.fwd(&Term::comm((**x).clone(), (**y).clone()), k));
                    out
                }
            },
            Term::Comm(x, y) => match self.eliminate(t) {
                Some(n) => self.fwd(&n, k),
                None => self.comm_raw(self.fwd(x, k), self.fwd(y, k)),
            },
            Term::ConflictElim(x) => match self.eliminate(t) {
                Some(n) => self.fwd(&n, k),
                None => self.fwd(x, k).into_iter().map(|s| step(s.events, Term::theta(s.target))).collect(),
            },
            Term::Unless(x, y) => match self.eliminate(t) {
                Some(n) => self.fwd(&n, k),
                None => {
                    self.fwd(x, k).into_iter().map(|s| step(s.events, Term::unless(s.target, (**y).clone()))).collect()
                }
            },
        };
        out.sort();
        out.dedup();
        out
    }

    fn comm_raw(&self, xs: Vec<Step>, ys: Vec<Step>) -> Vec<Step> {
        let mut out = Vec::new();
        for sx in &xs {
            for sy in &ys {
                if let ([ex], [ey]) = (sx.events.as_slice(), sy.events.as_slice()) {
                    if let Term::Event(c) = comm_atoms(&Term::Event(ex.clone()), &Term::Event(ey.clone()), self.sig) {
                        out.push(step(vec![c], Term::comm(sx.target.clone(), sy.target.clone())));
                    }
                }
            }
        }
        out
    }

    /// Lock-step: every component that is not done moves; done ones idle.
    fn par_fwd(&self, v: &[Term], k: u32) -> Vec<Step> {
        let mut partial: Vec<(Vec<EventInstance>, Vec<Term>, bool)> = vec![(vec![], vec![], false)];
        for c in v {
            let moves = self.fwd(c, k);
            let idle = done(c);
            if moves.is_empty() && !idle {
                return vec![];
            }
            let mut next = Vec::new();
            for (evs, kids, moved) in &partial {
                if idle {
                    let mut ks = kids.clone();
                    ks.push(c.clone());
                    next.push((evs.clone(), ks, *moved));
                }
                for m in &moves {
                    let mut es = evs.clone();
                    es.extend(m.events.iter().cloned());
                    let mut ks = kids.clone();
                    ks.push(m.target.clone());
                    next.push((es, ks, true));
                }
            }
            partial = next;
        }
        partial
            .into_iter()
            .filter(|(_, _, moved)| *moved)
            .map(|(evs, kids, _)| step(evs, canonicalize_root(&Term::Par(kids))))
            .collect()
    }

    pub fn rev(&self, t: &Term) -> Vec<Step> {
        let mut out = match t {
            Term::Event(e) if e.key.is_some() => {
                vec![step(vec![e.clone()], Term::Event(EventInstance { label: e.label.clone(), key: None }))]
            }
            Term::Tau(Some(m)) => vec![step(vec![tau_ev(Some(*m))], Term::Tau(None))],
            Term::Event(_) | Term::Tau(_) | Term::Delta | Term::RecRef(..) => vec![],
            Term::Choice(v) => {
                let mut out = Vec::new();
                for i in 0..v.len() {
                    if is_std(&v[i]) {
                        continue;
                    }
                    for s in self.rev(&v[i]) {
                        let mut kids = vec![s.target];
                        kids.extend(v.iter().enumerate().filter(|(j, c)| *j != i && is_std(c)).map(|(_, c)| c.clone()));
                        out.push(step(s.events, canonicalize_root(&Term::choice(kids))));
                    }
                }
                out
            }
            Term::Seq(v) => match v.iter().rposition(|c| !is_std(c)) {
                Some(i) if i == v.len() - 1 || self.gap_fill => self
                    .rev(&v[i])
                    .into_iter()
                    .map(|s| step(s.events, canonicalize_root(&Term::Seq(replace(v, i, s.target)))))
                    .collect(),
                _ => vec![],
            },
            Term::Par(v) => self.par_rev(v),
            Term::Encap(h, x) => {
                self.rev(x).into_iter().map(|s| step(s.events, Term::encap(h.clone(), s.target))).collect()
            }
            Term::Abstract(i, x) => self
                .rev(x)
                .into_iter()
                .map(|s| step(hide_events(i, &s.events), Term::hide(i.clone(), s.target)))
                .collect(),
            Term::Between(..) | Term::Comm(..) | Term::ConflictElim(..) | Term::Unless(..) => match self.eliminate(t) {
                Some(n) => self.rev(&n),
                None => self.rev_raw(t),
            },
        };
        out.sort();
        out.dedup();
        out
    }

    fn rev_raw(&self, t: &Term) -> Vec<Step> {
        match t {
            Term::Comm(x, y) => self.comm_raw(self.rev(x), self.rev(y)),
            Term::ConflictElim(x) => self.rev(x).into_iter().map(|s| step(s.events, Term::theta(s.target))).collect(),
            Term::Unless(x, y) => {
                self.rev(x).into_iter().map(|s| step(s.events, Term::unless(s.target, (**y).clone()))).collect()
            }
            _ => vec![],
        }
    }

    /// Components holding the undone key reverse together; the rest idle.
    fn par_rev(&self, v: &[Term]) -> Vec<Step> {
        let opts: Vec<Vec<Step>> = v.iter().map(|c| self.rev(c)).collect();
        let keys: BTreeSet<u32> = opts.iter().flatten().filter_map(step_key).collect();
        let mut out = Vec::new();
        'keys: for key in keys {
            let mut partial: Vec<(Vec<EventInstance>, Vec<Term>)> = vec![(vec![], vec![])];
            for (c, os) in v.iter().zip(&opts) {
                let mine: Vec<&Step> = os.iter().filter(|s| step_key(s) == Some(key)).collect();
                let involved = has_key(c, key);
                if involved && mine.is_empty() {
                    continue 'keys;
                }
                let mut next = Vec::new();
                for (evs, kids) in &partial {
                    if !involved {
                        let mut ks = kids.clone();
                        ks.push(c.clone());
                        next.push((evs.clone(), ks));
                    }
                    for m in &mine {
                        let mut es = evs.clone();
                        es.extend(m.events.iter().cloned());
                        let mut ks = kids.clone();
                        ks.push(m.target.clone());
                        next.push((es, ks));
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().map(|(evs, kids)| step(evs, canonicalize_root(&Term::Par(kids)))));
        }
        out
    }
}
