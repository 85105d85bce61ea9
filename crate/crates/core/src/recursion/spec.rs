use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{canonicalize, is_nstd, is_std, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecError {
    #[error("unknown recursion variable {0}")]
    UnknownVariable(String),
    #[error("specification is not guarded")]
    Unguarded,
    #[error("specification is not linear")]
    NotLinear,
    #[error("term is not in basic form")]
    NotBasic,
    #[error("variable is in no cluster for the given set")]
    NoCluster,
    #[error("cluster exits mix forward and reverse forms")]
    MixedExitForms,
    #[error("bounded comparison failed: {0}")]
    Bounded(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reversed,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub guarded: bool,
    pub linear: bool,
    pub direction: Direction,
}

/// Whether τ-prefixes count as guards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Setting {
    TauFree,
    Silent,
}

/// Named recursive specification. Variables inside right-hand sides are
/// `RecRef(var, name)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecSpec {
    pub name: String,
    pub equations: Vec<(String, Term)>,
}

impl RecSpec {
    pub fn new(name: &str, equations: Vec<(String, Term)>) -> RecSpec {
        RecSpec { name: name.to_string(), equations }
    }

    pub fn body(&self, var: &str) -> Option<&Term> {
        self.equations.iter().find(|(v, _)| v == var).map(|(_, t)| t)
    }

    pub fn vars(&self) -> Vec<String> {
        self.equations.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn reference(&self, var: &str) -> Term {
        Term::RecRef(var.to_string(), self.name.clone())
    }

    /// Same equations under another name.
    pub fn renamed(&self, name: &str) -> RecSpec {
        let equations = self.equations.iter().map(|(v, t)| (v.clone(), rename_refs(t, &self.name, name))).collect();
        RecSpec { name: name.to_string(), equations }
    }
}

pub(crate) fn rename_refs(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::RecRef(v, s) if s == from => Term::RecRef(v.clone(), to.to_string()),
        _ => {
            let kids: Vec<Term> = t.children().into_iter().map(|c| rename_refs(c, from, to)).collect();
            if kids.is_empty() {
                t.clone()
            } else {
                t.with_children(kids)
            }
        }
    }
}

/// Every execution of `t` performs a guarding action before it can terminate.
fn guards(t: &Term, setting: Setting) -> bool {
    match t {
        Term::Event(_) | Term::Delta => true,
        Term::Tau(_) => setting == Setting::TauFree,
        Term::RecRef(..) => false,
        Term::Choice(v) => v.iter().all(|c| guards(c, setting)),
        Term::Seq(v) | Term::Par(v) => v.iter().any(|c| guards(c, setting)),
        Term::Comm(x, y) | Term::Between(x, y) => guards(x, setting) || guards(y, setting),
        Term::Unless(x, _) | Term::ConflictElim(x) | Term::Encap(_, x) => guards(x, setting),
        // abstraction may turn a guard into τ
        Term::Abstract(_, x) => setting == Setting::TauFree && guards(x, setting),
    }
}

/// Variables occurring in `t` without a preceding guard.
fn unguarded_vars(t: &Term, setting: Setting, out: &mut BTreeSet<String>) {
    match t {
        Term::RecRef(v, _) => {
            out.insert(v.clone());
        }
        Term::Seq(v) => {
            for c in v {
                unguarded_vars(c, setting, out);
                if guards(c, setting) {
                    break;
                }
            }
        }
        _ => {
            for c in t.children() {
                unguarded_vars(c, setting, out);
            }
        }
    }
}

fn is_guarded(e: &RecSpec, setting: Setting) -> bool {
    let deps: BTreeMap<String, BTreeSet<String>> = e
        .equations
        .iter()
        .map(|(v, t)| {
            let mut s = BTreeSet::new();
            unguarded_vars(t, setting, &mut s);
            (v.clone(), s)
        })
        .collect();
    // substitute right-hand sides until a fixpoint; a variable reaching itself is unguarded
    for v in deps.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&String> = deps[v].iter().collect();
        while let Some(u) = stack.pop() {
            if u == v {
                return false;
            }
            if seen.insert(u.clone()) {
                if let Some(next) = deps.get(u) {
                    stack.extend(next.iter());
                }
            }
        }
    }
    true
}

fn is_linear_block(t: &Term, keyed: bool) -> bool {
    let atom_ok = |a: &Term| match a {
        Term::Event(e) => e.key.is_some() == keyed,
        Term::Tau(k) => k.is_some() == keyed,
        _ => false,
    };
    match t {
        Term::Par(v) => {
            v.iter().all(atom_ok) && {
                let keys: BTreeSet<u32> = v.iter().map(|a| a.max_key()).collect();
                !keyed || keys.len() == 1
            }
        }
        _ => atom_ok(t),
    }
}

/// Shape of one summand of a linear equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    /// `block . Y` or a terminal `block`.
    Forward(Term, Option<String>),
    /// `Y . block[m]` or a terminal keyed block.
    Reversed(Term, Option<String>),
}

pub(crate) fn summand_shape(s: &Term) -> Option<Shape> {
    match s {
        Term::Seq(v) if v.len() == 2 => match (&v[0], &v[1]) {
            (b, Term::RecRef(y, _)) if is_linear_block(b, false) => Some(Shape::Forward(b.clone(), Some(y.clone()))),
            (Term::RecRef(y, _), b) if is_linear_block(b, true) => Some(Shape::Reversed(b.clone(), Some(y.clone()))),
            _ => None,
        },
        b if is_linear_block(b, false) => Some(Shape::Forward(b.clone(), None)),
        b if is_linear_block(b, true) => Some(Shape::Reversed(b.clone(), None)),
        _ => None,
    }
}

pub(crate) fn summands(t: &Term) -> Vec<Term> {
    match canonicalize(t) {
        Term::Choice(v) => v,
        Term::Delta => vec![],
        other => vec![other],
    }
}

/// Shapes of every summand, or `None` if some summand is not linear.
pub(crate) fn linear_shapes(t: &Term) -> Option<Vec<Shape>> {
    summands(t).iter().map(summand_shape).collect()
}

pub fn validate_spec_in(e: &RecSpec, setting: Setting) -> Classification {
    let guarded = is_guarded(e, setting);
    let shapes: Option<Vec<Vec<Shape>>> = e.equations.iter().map(|(_, t)| linear_shapes(t)).collect();
    let linear = shapes.is_some();
    let direction = match shapes {
        Some(all) => {
            let flat: Vec<&Shape> = all.iter().flatten().collect();
            let fwd = flat.iter().all(|s| matches!(s, Shape::Forward(..)));
            let rev = flat.iter().all(|s| matches!(s, Shape::Reversed(..)));
            match (fwd, rev) {
                (true, _) => Direction::Forward,
                (false, true) => Direction::Reversed,
                _ => Direction::Mixed,
            }
        }
        None => {
            if e.equations.iter().all(|(_, t)| is_std(t)) {
                Direction::Forward
            } else if e.equations.iter().all(|(_, t)| is_nstd(t)) {
                Direction::Reversed
            } else {
                Direction::Mixed
            }
        }
    };
    Classification { guarded, linear, direction }
}

/// Classification in the silent-step setting, where τ is not a guard.
pub fn validate_spec(e: &RecSpec, sig: &crate::term::Signature) -> Classification {
    let _ = sig;
    validate_spec_in(e, Setting::Silent)
}

/// Right-hand side of `x` with its variables as references into `e`.
pub fn unfold_rdp(e: &RecSpec, x: &str) -> Result<Term, RecError> {
    e.body(x).map(canonicalize).ok_or_else(|| RecError::UnknownVariable(x.to_string()))
}
