//! Process terms, event instances, signatures and configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An atomic event name. Never `delta` or `tau`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("empty label")]
    Empty,
    #[error("reserved name `{0}` cannot be used as a label")]
    Reserved(String),
    #[error("invalid character in label `{0}`")]
    BadChar(String),
}

impl Label {
    pub fn new(name: &str) -> Result<Label, LabelError> {
        if name.is_empty() {
            return Err(LabelError::Empty);
        }
        if is_reserved(name) {
            return Err(LabelError::Reserved(name.to_string()));
        }
        let mut chars = name.chars();
        let first = chars.next().unwrap_or('_');
        if !(first.is_ascii_alphabetic() || first == '_') || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(LabelError::BadChar(name.to_string()));
        }
        Ok(Label(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_reserved(name: &str) -> bool {
    matches!(name, "delta" | "tau" | "theta" | "enc" | "hide")
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A label plus an optional history key; `key = None` is a standard event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventInstance {
    pub label: Label,
    pub key: Option<u32>,
}

impl EventInstance {
    pub fn std(label: Label) -> Self {
        EventInstance { label, key: None }
    }

    pub fn keyed(label: Label, key: u32) -> Self {
        EventInstance { label, key: Some(key) }
    }
}

/// Process term. `Tau` carries a key once executed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Event(EventInstance),
    Delta,
    Tau(Option<u32>),
    Choice(Vec<Term>),
    Seq(Vec<Term>),
    Par(Vec<Term>),
    Comm(Box<Term>, Box<Term>),
    Between(Box<Term>, Box<Term>),
    ConflictElim(Box<Term>),
    Unless(Box<Term>, Box<Term>),
    Encap(BTreeSet<Label>, Box<Term>),
    Abstract(BTreeSet<Label>, Box<Term>),
    RecRef(String, String),
}

impl Term {
    pub fn ev(name: &str) -> Term {
        Term::Event(EventInstance::std(Label::new(name).expect("valid label")))
    }

    pub fn hist(name: &str, key: u32) -> Term {
        Term::Event(EventInstance::keyed(Label::new(name).expect("valid label"), key))
    }

    pub fn tau() -> Term {
        Term::Tau(None)
    }

    pub fn choice(items: Vec<Term>) -> Term {
        build_nary(items, Term::Choice)
    }

    pub fn seq(items: Vec<Term>) -> Term {
        build_nary(items, Term::Seq)
    }

    pub fn par(items: Vec<Term>) -> Term {
        build_nary(items, Term::Par)
    }

    pub fn comm(x: Term, y: Term) -> Term {
        Term::Comm(Box::new(x), Box::new(y))
    }

    pub fn between(x: Term, y: Term) -> Term {
        Term::Between(Box::new(x), Box::new(y))
    }

    pub fn theta(x: Term) -> Term {
        Term::ConflictElim(Box::new(x))
    }

    pub fn unless(x: Term, y: Term) -> Term {
        Term::Unless(Box::new(x), Box::new(y))
    }

    pub fn encap(h: BTreeSet<Label>, x: Term) -> Term {
        Term::Encap(h, Box::new(x))
    }

    pub fn hide(i: BTreeSet<Label>, x: Term) -> Term {
        Term::Abstract(i, Box::new(x))
    }

    /// Atoms are events, histories, δ and τ.
    pub fn is_atom(&self) -> bool {
        matches!(self, Term::Event(_) | Term::Delta | Term::Tau(_))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Event(_) | Term::Delta | Term::Tau(_) | Term::RecRef(..) => vec![],
            Term::Choice(v) | Term::Seq(v) | Term::Par(v) => v.iter().collect(),
            Term::Comm(x, y) | Term::Between(x, y) | Term::Unless(x, y) => vec![x, y],
            Term::ConflictElim(x) | Term::Encap(_, x) | Term::Abstract(_, x) => vec![x],
        }
    }

    /// Mutable access to the `i`-th child.
    pub fn child_mut(&mut self, i: usize) -> Option<&mut Term> {
        match self {
            Term::Choice(v) | Term::Seq(v) | Term::Par(v) => v.get_mut(i),
            Term::Comm(x, y) | Term::Between(x, y) | Term::Unless(x, y) => match i {
                0 => Some(x),
                1 => Some(y),
                _ => None,
            },
            Term::ConflictElim(x) | Term::Encap(_, x) | Term::Abstract(_, x) => {
                if i == 0 {
                    Some(x)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn subterm_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        let mut cur = self;
        for &i in path {
            cur = cur.child_mut(i)?;
        }
        Some(cur)
    }

    /// Rebuilds the node with new children (same arity).
    pub fn with_children(&self, kids: Vec<Term>) -> Term {
        let mut kids = kids;
        match self {
            Term::Event(_) | Term::Delta | Term::Tau(_) | Term::RecRef(..) => self.clone(),
            Term::Choice(_) => Term::Choice(kids),
            Term::Seq(_) => Term::Seq(kids),
            Term::Par(_) => Term::Par(kids),
            _ => {
                let y = if kids.len() > 1 { kids.pop() } else { None };
                let x = Box::new(kids.pop().expect("arity"));
                match self {
                    Term::Comm(..) => Term::Comm(x, Box::new(y.expect("arity"))),
                    Term::Between(..) => Term::Between(x, Box::new(y.expect("arity"))),
                    Term::Unless(..) => Term::Unless(x, Box::new(y.expect("arity"))),
                    Term::ConflictElim(_) => Term::ConflictElim(x),
                    Term::Encap(h, _) => Term::Encap(h.clone(), x),
                    Term::Abstract(i, _) => Term::Abstract(i.clone(), x),
                    _ => unreachable!("leaf and list nodes handled above"),
                }
            }
        }
    }

    /// Every event instance, in left-to-right order.
    pub fn instances(&self) -> Vec<&EventInstance> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Term::Event(e) = t {
                out.push(e);
            }
        });
        out
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn has_recref(&self) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if matches!(t, Term::RecRef(..)) {
                found = true;
            }
        });
        found
    }

    /// Largest key occurring in the term.
    pub fn max_key(&self) -> u32 {
        let mut m = 0;
        self.walk(&mut |t| match t {
            Term::Event(EventInstance { key: Some(k), .. }) | Term::Tau(Some(k)) => m = m.max(*k),
            _ => {}
        });
        m
    }

    /// True if any event or τ in the term carries a key.
    pub fn has_key(&self) -> bool {
        self.max_key() > 0
    }
}

fn build_nary(mut items: Vec<Term>, mk: fn(Vec<Term>) -> Term) -> Term {
    match items.len() {
        0 => Term::Delta,
        1 => items.pop().expect("one item"),
        _ => mk(items),
    }
}

/// Flattens + · ∥, sorts the operands of + and ∥, collapses singletons.
pub fn canonicalize(t: &Term) -> Term {
    match t {
        Term::Event(_) | Term::Delta | Term::Tau(_) | Term::RecRef(..) => t.clone(),
        Term::Choice(v) => canon_list(v.iter().map(canonicalize).collect(), true, ListKind::Choice),
        Term::Seq(v) => canon_list(v.iter().map(canonicalize).collect(), false, ListKind::Seq),
        Term::Par(v) => canon_list(v.iter().map(canonicalize).collect(), true, ListKind::Par),
        _ => {
            let kids = t.children().into_iter().map(canonicalize).collect();
            t.with_children(kids)
        }
    }
}

/// Canonicalizes only the root node, assuming canonical children.
pub fn canonicalize_root(t: &Term) -> Term {
    match t {
        Term::Choice(v) => canon_list(v.clone(), true, ListKind::Choice),
        Term::Seq(v) => canon_list(v.clone(), false, ListKind::Seq),
        Term::Par(v) => canon_list(v.clone(), true, ListKind::Par),
        _ => t.clone(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ListKind {
    Choice,
    Seq,
    Par,
}

fn canon_list(items: Vec<Term>, sort: bool, kind: ListKind) -> Term {
    let mut flat = Vec::with_capacity(items.len());
    for it in items {
        match (kind, it) {
            (ListKind::Choice, Term::Choice(v)) | (ListKind::Seq, Term::Seq(v)) | (ListKind::Par, Term::Par(v)) => {
                flat.extend(v)
            }
            (_, other) => flat.push(other),
        }
    }
    if sort {
        flat.sort();
    }
    match kind {
        ListKind::Choice => build_nary(flat, Term::Choice),
        ListKind::Seq => build_nary(flat, Term::Seq),
        ListKind::Par => build_nary(flat, Term::Par),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StdStatus {
    Std,
    NStd,
    Mixed,
}

/// Std: nothing keyed. NStd: every event (and τ) keyed. δ is neutral.
pub fn std_status(t: &Term) -> StdStatus {
    let (mut keyed, mut plain) = (false, false);
    scan_atoms(t, &mut keyed, &mut plain);
    match (keyed, plain) {
        (false, _) => StdStatus::Std,
        (true, false) => StdStatus::NStd,
        (true, true) => StdStatus::Mixed,
    }
}

/// Marks keyed and key-free atoms. The guard of `x <| y` only gates `x` and
/// does not count towards its status.
fn scan_atoms(t: &Term, keyed: &mut bool, plain: &mut bool) {
    match t {
        Term::Event(EventInstance { key, .. }) | Term::Tau(key) => {
            if key.is_some() {
                *keyed = true
            } else {
                *plain = true
            }
        }
        Term::Unless(x, _) => scan_atoms(x, keyed, plain),
        _ => t.children().into_iter().for_each(|c| scan_atoms(c, keyed, plain)),
    }
}

pub fn is_std(t: &Term) -> bool {
    std_status(t) == StdStatus::Std
}

pub fn is_nstd(t: &Term) -> bool {
    std_status(t) == StdStatus::NStd
}

/// The term with every key removed.
pub fn strip_keys(t: &Term) -> Term {
    match t {
        Term::Event(e) => Term::Event(EventInstance::std(e.label.clone())),
        Term::Tau(_) => Term::Tau(None),
        _ => {
            let kids: Vec<Term> = t.children().into_iter().map(strip_keys).collect();
            if kids.is_empty() {
                t.clone()
            } else {
                t.with_children(kids)
            }
        }
    }
}

/// Labels occurring in the term, keys stripped. Encapsulation and
/// abstraction sets are not included.
pub fn alphabet_of(t: &Term) -> BTreeSet<Label> {
    t.instances().into_iter().map(|e| e.label.clone()).collect()
}

/// Executed events with their causal order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub events: Vec<(Label, u32)>,
    /// Pairs `(i, j)` meaning `events[i]` precedes `events[j]`; transitively closed.
    pub order: BTreeSet<(usize, usize)>,
}

impl Configuration {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.order.contains(&(i, j))
    }

    pub fn index_of(&self, ev: &(Label, u32)) -> Vec<usize> {
        self.events.iter().enumerate().filter(|(_, e)| *e == ev).map(|(i, _)| i).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("term is not in basic form")]
    NotBasic,
}

/// Executed events of a basic term; `·` orders, `+` and `∥` do not.
pub fn configuration_of(t: &Term) -> Result<Configuration, ConfigError> {
    if !crate::rewriter::is_basic(t) {
        return Err(ConfigError::NotBasic);
    }
    Ok(configuration_any(t))
}

/// Same as [`configuration_of`] without the basic-form check.
pub fn configuration_any(t: &Term) -> Configuration {
    let mut cfg = Configuration::default();
    collect_config(t, &mut cfg);
    cfg
}

fn collect_config(t: &Term, cfg: &mut Configuration) -> Vec<usize> {
    match t {
        Term::Event(EventInstance { label, key: Some(k) }) => {
            cfg.events.push((label.clone(), *k));
            vec![cfg.events.len() - 1]
        }
        Term::Tau(Some(k)) => {
            cfg.events.push((Label("tau".to_string()), *k));
            vec![cfg.events.len() - 1]
        }
        Term::Seq(items) => {
            let mut before: Vec<usize> = Vec::new();
            for it in items {
                let now = collect_config(it, cfg);
                for &a in &before {
                    for &b in &now {
                        cfg.order.insert((a, b));
                    }
                }
                before.extend(now);
            }
            before
        }
        // the right operand only filters the left one
        Term::Unless(x, _) => collect_config(x, cfg),
        Term::Abstract(i, x) => {
            let ids = collect_config(x, cfg);
            for &j in &ids {
                if i.contains(&cfg.events[j].0) {
                    cfg.events[j].0 = tau_label();
                }
            }
            ids
        }
        _ => {
            let mut all = Vec::new();
            for c in t.children() {
                all.extend(collect_config(c, cfg));
            }
            all
        }
    }
}

/// Label of executed τ inside configurations.
pub fn tau_label() -> Label {
    Label("tau".to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("label `{0}` is not in the alphabet")]
    UnknownLabel(String),
    #[error("gamma({0},{1}) already defined differently")]
    GammaConflict(String, String),
    #[error("conflict must be irreflexive: `{0}`")]
    ReflexiveConflict(String),
    #[error("priority must be a strict partial order: cycle through `{0}`")]
    PriorityCycle(String),
}

/// Alphabet, communication function γ, conflict ♯ and priority <.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub alphabet: BTreeSet<Label>,
    gamma: BTreeMap<(Label, Label), Label>,
    conflict: BTreeSet<(Label, Label)>,
    /// Transitively closed strict order: `(a, b)` means `a < b`.
    prio: BTreeSet<(Label, Label)>,
}

impl Signature {
    pub fn new<I: IntoIterator<Item = Label>>(alphabet: I) -> Self {
        Signature { alphabet: alphabet.into_iter().collect(), ..Default::default() }
    }

    /// Convenience constructor from names; panics on invalid names.
    pub fn from_names(names: &[&str]) -> Self {
        Signature::new(names.iter().map(|n| Label::new(n).expect("valid label")))
    }

    fn check(&self, l: &Label) -> Result<(), SignatureError> {
        if self.alphabet.contains(l) {
            Ok(())
        } else {
            Err(SignatureError::UnknownLabel(l.to_string()))
        }
    }

    pub fn add_gamma(&mut self, a: Label, b: Label, c: Label) -> Result<(), SignatureError> {
        self.check(&a)?;
        self.check(&b)?;
        self.check(&c)?;
        for key in [(a.clone(), b.clone()), (b.clone(), a.clone())] {
            if let Some(old) = self.gamma.get(&key) {
                if *old != c {
                    return Err(SignatureError::GammaConflict(a.to_string(), b.to_string()));
                }
            }
        }
        self.gamma.insert((a.clone(), b.clone()), c.clone());
        self.gamma.insert((b, a), c);
        Ok(())
    }

    pub fn add_conflict(&mut self, a: Label, b: Label) -> Result<(), SignatureError> {
        self.check(&a)?;
        self.check(&b)?;
        if a == b {
            return Err(SignatureError::ReflexiveConflict(a.to_string()));
        }
        self.conflict.insert((a.clone(), b.clone()));
        self.conflict.insert((b, a));
        Ok(())
    }

    /// Declares `a < b` and closes transitively.
    pub fn add_prio(&mut self, a: Label, b: Label) -> Result<(), SignatureError> {
        self.check(&a)?;
        self.check(&b)?;
        let mut next = self.prio.clone();
        next.insert((a, b));
        loop {
            let mut added = Vec::new();
            for (x, y) in &next {
                for (y2, z) in &next {
                    if y == y2 && !next.contains(&(x.clone(), z.clone())) {
                        added.push((x.clone(), z.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            next.extend(added);
        }
        if let Some((x, _)) = next.iter().find(|(x, y)| x == y) {
            return Err(SignatureError::PriorityCycle(x.to_string()));
        }
        self.prio = next;
        Ok(())
    }

    pub fn gamma(&self, a: &Label, b: &Label) -> Option<&Label> {
        self.gamma.get(&(a.clone(), b.clone()))
    }

    pub fn in_conflict(&self, a: &Label, b: &Label) -> bool {
        self.conflict.contains(&(a.clone(), b.clone()))
    }

    pub fn less(&self, a: &Label, b: &Label) -> bool {
        self.prio.contains(&(a.clone(), b.clone()))
    }

    pub fn leq(&self, a: &Label, b: &Label) -> bool {
        a == b || self.less(a, b)
    }

    pub fn gamma_entries(&self) -> impl Iterator<Item = (&Label, &Label, &Label)> {
        self.gamma.iter().filter(|((a, b), _)| a <= b).map(|((a, b), c)| (a, b, c))
    }

    pub fn conflict_pairs(&self) -> impl Iterator<Item = (&Label, &Label)> {
        self.conflict.iter().filter(|(a, b)| a < b).map(|(a, b)| (a, b))
    }

    pub fn prio_pairs(&self) -> impl Iterator<Item = (&Label, &Label)> {
        self.prio.iter().map(|(a, b)| (a, b))
    }

    /// Signature used by the test suites: labels a b c, γ(a,b)=c, ♯(a,b), b<c.
    pub fn suite() -> Signature {
        let mut s = Signature::from_names(&["a", "b", "c"]);
        let l = |n: &str| Label::new(n).expect("valid label");
        s.add_gamma(l("a"), l("b"), l("c")).expect("valid gamma");
        s.add_conflict(l("a"), l("b")).expect("valid conflict");
        s.add_prio(l("b"), l("c")).expect("valid prio");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: &str) -> Label {
        Label::new(n).unwrap()
    }

    #[test]
    fn canonical_choice_sorted_and_flat() {
        let t = Term::Choice(vec![Term::Choice(vec![Term::ev("b"), Term::ev("a")]), Term::ev("c")]);
        assert_eq!(canonicalize(&t), Term::Choice(vec![Term::ev("a"), Term::ev("b"), Term::ev("c")]));
    }

    #[test]
    fn canonical_par_commutes() {
        let t = Term::Par(vec![Term::ev("b"), Term::ev("a")]);
        assert_eq!(canonicalize(&t), Term::Par(vec![Term::ev("a"), Term::ev("b")]));
    }

    #[test]
    fn status_examples() {
        assert_eq!(std_status(&Term::seq(vec![Term::ev("a"), Term::ev("b")])), StdStatus::Std);
        assert_eq!(std_status(&Term::seq(vec![Term::hist("a", 1), Term::hist("b", 2)])), StdStatus::NStd);
        assert_eq!(std_status(&Term::seq(vec![Term::hist("a", 1), Term::ev("b")])), StdStatus::Mixed);
        assert_eq!(std_status(&Term::Delta), StdStatus::Std);
    }

    #[test]
    fn configuration_examples() {
        let c = configuration_of(&Term::seq(vec![Term::hist("a", 1), Term::ev("b")])).unwrap();
        assert_eq!(c.events, vec![(l("a"), 1)]);
        assert!(c.order.is_empty());
        let c = configuration_of(&Term::seq(vec![Term::hist("a", 1), Term::hist("b", 2)])).unwrap();
        assert!(c.precedes(0, 1));
        let c = configuration_of(&Term::par(vec![Term::hist("a", 1), Term::hist("b", 1)])).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.order.is_empty());
        assert_eq!(configuration_of(&Term::between(Term::ev("a"), Term::ev("b"))), Err(ConfigError::NotBasic));
    }

    #[test]
    fn alphabet_examples() {
        let t = Term::seq(vec![Term::ev("a"), Term::hist("b", 2)]);
        assert_eq!(alphabet_of(&t), [l("a"), l("b")].into_iter().collect());
        assert!(alphabet_of(&Term::Delta).is_empty());
        let t = Term::encap([l("a")].into_iter().collect(), Term::choice(vec![Term::ev("a"), Term::ev("c")]));
        assert_eq!(alphabet_of(&t), [l("a"), l("c")].into_iter().collect());
    }

    #[test]
    fn signature_laws() {
        let s = Signature::suite();
        assert_eq!(s.gamma(&l("b"), &l("a")), Some(&l("c")));
        assert!(s.in_conflict(&l("b"), &l("a")));
        assert!(s.less(&l("b"), &l("c")));
        assert!(!s.less(&l("c"), &l("b")));
        let mut s2 = Signature::from_names(&["a", "b"]);
        assert!(s2.add_conflict(l("a"), l("a")).is_err());
        s2.add_prio(l("a"), l("b")).unwrap();
        assert!(s2.add_prio(l("b"), l("a")).is_err());
        assert!(Label::new("tau").is_err());
    }
}
