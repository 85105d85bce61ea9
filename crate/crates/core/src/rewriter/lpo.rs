//! Lexicographic path order over terms with metavariables.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::syntax::parse_pattern;
use crate::term::{Signature, Term};

/// Operator kinds that take part in the precedence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    Abstract,
    Encap,
    ConflictElim,
    Unless,
    Comm,
    Between,
    Par,
    Seq,
    Choice,
    Tau,
    Delta,
    Event,
    RecRef,
}

/// Operator precedence, highest first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precedence(pub Vec<Op>);

impl Default for Precedence {
    fn default() -> Self {
        use Op::*;
        Precedence(vec![
            Abstract,
            Encap,
            ConflictElim,
            Unless,
            Comm,
            Between,
            Par,
            Seq,
            Choice,
            Tau,
            Delta,
            Event,
            RecRef,
        ])
    }
}

impl Precedence {
    fn rank(&self, op: Op) -> usize {
        let n = self.0.len();
        n - self.0.iter().position(|o| *o == op).unwrap_or(n)
    }
}

fn op_of(t: &Term) -> Op {
    match t {
        Term::Event(_) => Op::Event,
        Term::Delta => Op::Delta,
        Term::Tau(_) => Op::Tau,
        Term::Choice(_) => Op::Choice,
        Term::Seq(_) => Op::Seq,
        Term::Par(_) => Op::Par,
        Term::Comm(..) => Op::Comm,
        Term::Between(..) => Op::Between,
        Term::ConflictElim(_) => Op::ConflictElim,
        Term::Unless(..) => Op::Unless,
        Term::Encap(..) => Op::Encap,
        Term::Abstract(..) => Op::Abstract,
        Term::RecRef(..) => Op::RecRef,
    }
}

fn is_var(t: &Term) -> bool {
    matches!(t, Term::RecRef(_, s) if s == "?")
}

fn occurs(v: &Term, t: &Term) -> bool {
    v == t || t.children().into_iter().any(|c| occurs(v, c))
}

/// Compares function symbols; constants and parameterised operators compare
/// by their parameters after the operator rank.
fn cmp_symbol(s: &Term, t: &Term, p: &Precedence) -> Ordering {
    let (os, ot) = (op_of(s), op_of(t));
    p.rank(os).cmp(&p.rank(ot)).then_with(|| match (s, t) {
        (Term::Event(a), Term::Event(b)) => a.cmp(b),
        (Term::Tau(a), Term::Tau(b)) => a.cmp(b),
        (Term::Encap(a, _), Term::Encap(b, _)) | (Term::Abstract(a, _), Term::Abstract(b, _)) => a.cmp(b),
        (Term::RecRef(a, x), Term::RecRef(b, y)) => (a, x).cmp(&(b, y)),
        _ => Ordering::Equal,
    })
}

/// `s >lpo t` under precedence `p`. `RecRef(_, "?")` nodes are variables.
/// `<|` compares its arguments right to left, everything else left to right.
pub fn lpo_greater(s: &Term, t: &Term, p: &Precedence) -> bool {
    if is_var(s) {
        return false;
    }
    if is_var(t) {
        return s != t && occurs(t, s);
    }
    let sargs = s.children();
    if sargs.iter().any(|si| *si == t || lpo_greater(si, t, p)) {
        return true;
    }
    let targs = t.children();
    match cmp_symbol(s, t, p) {
        Ordering::Greater => targs.iter().all(|tj| lpo_greater(s, tj, p)),
        Ordering::Equal => {
            if !targs.iter().all(|tj| lpo_greater(s, tj, p)) {
                return false;
            }
            if matches!(s, Term::Unless(..)) {
                lex_greater(sargs.iter().rev().copied(), targs.iter().rev().copied(), p)
            } else {
                lex_greater(sargs.iter().copied(), targs.iter().copied(), p)
            }
        }
        Ordering::Less => false,
    }
}

fn lex_greater<'a>(
    mut a: impl Iterator<Item = &'a Term>,
    mut b: impl Iterator<Item = &'a Term>,
    p: &Precedence,
) -> bool {
    loop {
        match (a.next(), b.next()) {
            (Some(x), Some(y)) if x == y => continue,
            (Some(x), Some(y)) => return lpo_greater(x, y, p),
            (Some(_), None) => return true,
            _ => return false,
        }
    }
}

/// Left- and right-hand sides of a rule in binary form.
#[derive(Clone, Debug)]
pub struct RulePattern {
    pub id: &'static str,
    pub lhs: Term,
    pub rhs: Term,
    pub branching_only: bool,
}

const PATTERNS: &[(&str, &str, &str)] = &[
    ("RA3", "x + x", "x"),
    ("RA41", "(x + y) . z", "x . z + y . z"),
    ("RA42", "x . (y + z)", "x . y + x . z"),
    ("RA5", "(x . y) . z", "x . (y . z)"),
    ("RA6", "x + delta", "x"),
    ("BA.A7f", "delta . x", "delta"),
    ("BA.A7r", "x . delta", "delta"),
    ("RP1", "x & y", "x || y + x | y"),
    ("RP4", "e1 || e2 . y", "(e1 || e2) . y"),
    ("RRP4", "e1 || y . e2", "y . (e1 || e2)"),
    ("RP5", "e1 . x || e2", "(e1 || e2) . x"),
    ("RRP5", "x . e1 || e2", "x . (e1 || e2)"),
    ("RP6", "e1 . x || e2 . y", "(e1 || e2) . (x & y)"),
    ("RRP6", "x . e1 || y . e2", "(x & y) . (e1 || e2)"),
    ("RP7", "(x + y) || z", "x || z + y || z"),
    ("RP8", "x || (y + z)", "x || y + x || z"),
    ("RP9", "delta || x", "delta"),
    ("RP10", "x || delta", "delta"),
    ("RC11", "e1 | e2", "g"),
    ("RRC11", "e1 | e2", "g"),
    ("RC12", "e1 | e2 . y", "g . y"),
    ("RRC12", "e1 | y . e2", "y . g"),
    ("RC13", "e1 . x | e2", "g . x"),
    ("RRC13", "x . e1 | e2", "x . g"),
    ("RC14", "e1 . x | e2 . y", "g . (x & y)"),
    ("RRC14", "x . e1 | y . e2", "(x & y) . g"),
    ("RC15", "(x + y) | z", "x | z + y | z"),
    ("RC16", "x | (y + z)", "x | y + x | z"),
    ("RC17", "delta | x", "delta"),
    ("RC18", "x | delta", "delta"),
    ("RCE19", "theta(e1)", "e1"),
    ("RRCE19", "theta(e1)", "e1"),
    ("RCE20", "theta(delta)", "delta"),
    ("RCE21", "theta(x + y)", "theta(x) <| y + theta(y) <| x"),
    ("RCE22", "theta(x . y)", "theta(x) . theta(y)"),
    ("RCE23", "theta(x || y)", "(theta(x) <| y) || y + (theta(y) <| x) || x"),
    ("RCE24", "theta(x | y)", "(theta(x) <| y) | y + (theta(y) <| x) | x"),
    ("RU25", "e1 <| e2", "tau"),
    ("RRU25", "e1 <| e2", "tau"),
    ("RU26", "e1 <| e3", "e1"),
    ("RRU26", "e1 <| e3", "e1"),
    ("RU27", "e3 <| e1", "tau"),
    ("RRU27", "e3 <| e1", "tau"),
    ("RU.keep", "e1 <| e2", "e1"),
    ("RU.tau", "e1 <| tau", "e1"),
    ("RU28", "x <| delta", "x"),
    ("RU29", "delta <| x", "delta"),
    ("RU30", "(x + y) <| z", "x <| z + y <| z"),
    ("RU31", "x . y <| z", "(x <| z) . (y <| z)"),
    ("RU32", "(x || y) <| z", "(x <| z) || (y <| z)"),
    ("RU33", "(x | y) <| z", "(x <| z) | (y <| z)"),
    ("RU34", "x <| (y + z)", "(x <| y) <| z"),
    ("RU35", "x <| y . z", "(x <| y) <| z"),
    ("RU36", "x <| (y || z)", "(x <| y) <| z"),
    ("RU37", "x <| (y | z)", "(x <| y) <| z"),
    ("RD1", "enc{h}(e1)", "e1"),
    ("RRD1", "enc{h}(e1)", "e1"),
    ("RD2", "enc{h}(e1)", "delta"),
    ("RRD2", "enc{h}(e1)", "delta"),
    ("RD3", "enc{h}(delta)", "delta"),
    ("RD.tau", "enc{h}(tau)", "tau"),
    ("RD4", "enc{h}(x + y)", "enc{h}(x) + enc{h}(y)"),
    ("RD5", "enc{h}(x . y)", "enc{h}(x) . enc{h}(y)"),
    ("RD6", "enc{h}(x || y)", "enc{h}(x) || enc{h}(y)"),
    ("RTI1", "hide{h}(e1)", "e1"),
    ("RRTI1", "hide{h}(e1)", "e1"),
    ("RTI2", "hide{h}(e1)", "tau"),
    ("RRTI2", "hide{h}(e1)", "tau"),
    ("RTI3", "hide{h}(delta)", "delta"),
    ("RTI.tau", "hide{h}(tau)", "tau"),
    ("RTI4", "hide{h}(x + y)", "hide{h}(x) + hide{h}(y)"),
    ("RTI5", "hide{h}(x . y)", "hide{h}(x) . hide{h}(y)"),
    ("RTI6", "hide{h}(x || y)", "hide{h}(x) || hide{h}(y)"),
    ("RB1", "e1 . tau", "e1"),
    ("RRB1", "tau . e1", "e1"),
    ("RB2", "e1 . (tau . (x + y) + x)", "e1 . (x + y)"),
    ("RRB2", "((x + y) . tau + x) . e1", "(x + y) . e1"),
    ("RB3", "x || tau", "x"),
];

/// Every shipped rule as a pattern pair.
pub fn rule_patterns() -> Vec<RulePattern> {
    let sig = Signature::from_names(&["g", "h"]);
    let vars = ["x", "y", "z", "e1", "e2", "e3"];
    PATTERNS
        .iter()
        .map(|(id, l, r)| RulePattern {
            id,
            lhs: parse_pattern(l, &sig, &vars).expect("rule pattern parses"),
            rhs: parse_pattern(r, &sig, &vars).expect("rule pattern parses"),
            branching_only: id.starts_with("RB") || id.starts_with("RRB"),
        })
        .collect()
}

/// Ids of all shipped rules.
pub fn rule_ids() -> Vec<&'static str> {
    PATTERNS.iter().map(|(id, _, _)| *id).collect()
}
