//! Term rewriting: normalization to basic terms, single axiom application,
//! and the termination certificate.

mod basic;
mod lpo;
mod rules;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::render;
use crate::term::{canonicalize, canonicalize_root, Signature, Term};

pub use basic::is_basic;
pub(crate) use basic::is_block;
pub use lpo::{lpo_greater, rule_ids, rule_patterns, Op, Precedence, RulePattern};
pub(crate) use rules::comm_atoms;
pub use rules::Mode;

use rules::{root_attempts, Attempt, Ctx};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("term contains a recursion reference")]
    NotClosed,
    #[error("parallel block mixes keys: {0}")]
    KeyClash(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("rule {0} does not match at the given position")]
    NoMatch(String),
    #[error("side condition of {0} fails")]
    SideConditionFailed(String),
    #[error("no subterm at path {0:?}")]
    BadPath(Vec<usize>),
    #[error("unknown rule {0}")]
    UnknownRule(String),
}

/// One rewrite step. `rule` is `AC` for a reordering/flattening step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: String,
    pub path: Vec<usize>,
    pub before: Term,
    pub after: Term,
}

#[derive(Serialize, Deserialize)]
struct TraceLine {
    rule: String,
    path: Vec<usize>,
    before: String,
    after: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    /// One JSON object per step.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let line = TraceLine {
                rule: s.rule.clone(),
                path: s.path.clone(),
                before: render(&s.before),
                after: render(&s.after),
            };
            out.push_str(&serde_json::to_string(&line).expect("trace serializes"));
            out.push('\n');
        }
        out
    }

    /// Replays the trace from `start`; `None` if a step does not fit.
    pub fn replay(&self, start: &Term) -> Option<Term> {
        let mut cur = start.clone();
        for s in &self.steps {
            let slot = cur.subterm_mut(&s.path)?;
            if *slot != s.before {
                return None;
            }
            *slot = s.after.clone();
        }
        Some(cur)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

struct Normalizer<'a> {
    ctx: Ctx<'a>,
    trace: Option<Vec<TraceStep>>,
    memo: HashMap<Term, Term>,
}

impl Normalizer<'_> {
    fn record(&mut self, rule: &str, path: &[usize], before: &Term, after: &Term) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(TraceStep {
                rule: rule.to_string(),
                path: path.to_vec(),
                before: before.clone(),
                after: after.clone(),
            });
        }
    }

    fn nf(&mut self, t: Term, path: &mut Vec<usize>) -> Result<Term, RewriteError> {
        if self.trace.is_none() {
            if let Some(r) = self.memo.get(&t) {
                return Ok(r.clone());
            }
        }
        let key = if self.trace.is_none() { Some(t.clone()) } else { None };
        let out = self.nf_inner(t, path)?;
        if let Some(k) = key {
            self.memo.insert(k, out.clone());
        }
        Ok(out)
    }

    fn nf_inner(&mut self, t: Term, path: &mut Vec<usize>) -> Result<Term, RewriteError> {
        if matches!(t, Term::RecRef(..)) && !self.ctx.open {
            return Err(RewriteError::NotClosed);
        }
        let kids: Vec<Term> = t.children().into_iter().cloned().collect();
        let mut t = t;
        if !kids.is_empty() {
            let mut done = Vec::with_capacity(kids.len());
            for (i, k) in kids.into_iter().enumerate() {
                path.push(i);
                let r = self.nf(k, path);
                path.pop();
                let r = r?;
                done.push(r);
                // keep the logical whole term current for the trace
                if self.trace.is_some() {
                    let mut cur = done.clone();
                    cur.extend(t.children().into_iter().skip(i + 1).cloned());
                    t = t.with_children(cur);
                }
            }
            if self.trace.is_none() {
                t = t.with_children(done);
            }
        }
        let c = canonicalize_root(&t);
        if c != t {
            self.record("AC", path, &t, &c);
            t = c;
        }
        let mut clash = false;
        for (id, a) in root_attempts(&t, &self.ctx) {
            match a {
                Attempt::Fired(r) => {
                    self.record(id, path, &t, &r);
                    return self.nf(r, path);
                }
                Attempt::KeyClash => clash = true,
                Attempt::SideFail => {}
            }
        }
        if clash {
            return Err(RewriteError::KeyClash(render(&t)));
        }
        Ok(t)
    }
}

fn check_closed(t: &Term) -> Result<(), RewriteError> {
    if t.has_recref() {
        Err(RewriteError::NotClosed)
    } else {
        Ok(())
    }
}

/// Normalizes a closed term, recording every step.
pub fn normalize(t: &Term, sig: &Signature, mode: Mode) -> Result<(Term, RewriteTrace), RewriteError> {
    check_closed(t)?;
    let mut n = Normalizer {
        ctx: Ctx { sig, mode, open: false, drop_histories: false },
        trace: Some(Vec::new()),
        memo: HashMap::new(),
    };
    let c = canonicalize(t);
    if c != *t {
        n.record("AC", &[], t, &c);
    }
    let r = n.nf(c, &mut Vec::new())?;
    Ok((r, RewriteTrace { steps: n.trace.unwrap_or_default() }))
}

/// Normal form without a trace.
pub fn normal_form(t: &Term, sig: &Signature, mode: Mode) -> Result<Term, RewriteError> {
    check_closed(t)?;
    let mut n =
        Normalizer { ctx: Ctx { sig, mode, open: false, drop_histories: false }, trace: None, memo: HashMap::new() };
    n.nf(canonicalize(t), &mut Vec::new())
}

/// Normal form treating recursion references as opaque items.
pub(crate) fn normal_form_open(t: &Term, sig: &Signature, mode: Mode) -> Result<Term, RewriteError> {
    let mut n =
        Normalizer { ctx: Ctx { sig, mode, open: true, drop_histories: false }, trace: None, memo: HashMap::new() };
    n.nf(canonicalize(t), &mut Vec::new())
}

fn all_paths(t: &Term, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(prefix.clone());
    for (i, c) in t.children().into_iter().enumerate() {
        prefix.push(i);
        all_paths(c, prefix, out);
        prefix.pop();
    }
}

/// Every single rewrite step from `t` (canonical), at every position.
pub fn one_step(t: &Term, sig: &Signature, mode: Mode) -> Vec<(&'static str, Vec<usize>, Term)> {
    let ctx = Ctx { sig, mode, open: false, drop_histories: false };
    let mut paths = Vec::new();
    all_paths(t, &mut Vec::new(), &mut paths);
    let mut out = Vec::new();
    for p in paths {
        let sub = t.subterm(&p).expect("path exists");
        for (id, a) in root_attempts(sub, &ctx) {
            if let Attempt::Fired(r) = a {
                let mut whole = t.clone();
                *whole.subterm_mut(&p).expect("path exists") = r;
                out.push((id, p.clone(), canonicalize(&whole)));
            }
        }
    }
    out
}

/// All normal forms reachable from `t` under any rewrite order.
pub fn all_normal_forms(
    t: &Term,
    sig: &Signature,
    mode: Mode,
    memo: &mut HashMap<Term, BTreeSet<Term>>,
) -> BTreeSet<Term> {
    if let Some(s) = memo.get(t) {
        return s.clone();
    }
    let succ = one_step(t, sig, mode);
    let mut out = BTreeSet::new();
    if succ.is_empty() {
        out.insert(t.clone());
    } else {
        let mut seen = BTreeSet::new();
        for (_, _, r) in succ {
            if seen.insert(r.clone()) {
                out.extend(all_normal_forms(&r, sig, mode, memo));
            }
        }
    }
    memo.insert(t.clone(), out.clone());
    out
}

fn reassociate(t: &Term) -> Option<Term> {
    match t {
        Term::Seq(v) if v.len() >= 2 => match &v[0] {
            Term::Seq(inner) if inner.len() >= 2 => {
                let mut rest = inner[1..].to_vec();
                rest.extend_from_slice(&v[1..]);
                Some(Term::Seq(vec![inner[0].clone(), Term::seq(rest)]))
            }
            _ if v.len() >= 3 => Some(Term::Seq(vec![v[0].clone(), Term::Seq(v[1..].to_vec())])),
            _ => None,
        },
        _ => None,
    }
}

/// Applies one named rule at `path`. RA5 works on the term as given; every
/// other rule sees the canonical form and returns a canonical result.
pub fn apply_axiom(t: &Term, rule: &str, path: &[usize], sig: &Signature) -> Result<Term, AxiomError> {
    if !rule_ids().contains(&rule) {
        return Err(AxiomError::UnknownRule(rule.to_string()));
    }
    if rule == "RA5" {
        let sub = t.subterm(path).ok_or_else(|| AxiomError::BadPath(path.to_vec()))?;
        let r = reassociate(sub).ok_or_else(|| AxiomError::NoMatch(rule.to_string()))?;
        let mut whole = t.clone();
        *whole.subterm_mut(path).expect("path exists") = r;
        return Ok(whole);
    }
    let c = canonicalize(t);
    let sub = c.subterm(path).ok_or_else(|| AxiomError::BadPath(path.to_vec()))?;
    let ctx = Ctx { sig, mode: Mode::Branching, open: false, drop_histories: true };
    let mut side = false;
    for (id, a) in root_attempts(sub, &ctx) {
        if id != rule {
            continue;
        }
        match a {
            Attempt::Fired(r) => {
                let mut whole = c.clone();
                *whole.subterm_mut(path).expect("path exists") = r;
                return Ok(canonicalize(&whole));
            }
            Attempt::SideFail => side = true,
            Attempt::KeyClash => {}
        }
    }
    if side || side_fails_generic(sub, rule, &ctx) {
        Err(AxiomError::SideConditionFailed(rule.to_string()))
    } else {
        Err(AxiomError::NoMatch(rule.to_string()))
    }
}

/// Operators whose rules all share a basic-argument condition report it under a
/// family id; map the concrete id to that family.
fn side_fails_generic(sub: &Term, rule: &str, ctx: &Ctx) -> bool {
    let family = if rule.starts_with("RCE") || rule.starts_with("RRCE") {
        "RCE"
    } else if rule.starts_with("RU") || rule.starts_with("RRU") {
        "RU"
    } else if rule.starts_with("RD") || rule.starts_with("RRD") {
        "RD"
    } else if rule.starts_with("RTI") || rule.starts_with("RRTI") {
        "RTI"
    } else {
        return false;
    };
    root_attempts(sub, ctx).iter().any(|(id, a)| *id == family && *a == Attempt::SideFail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn sig() -> Signature {
        Signature::suite()
    }

    fn nf(s: &str, mode: Mode) -> String {
        render(&normal_form(&parse_term(s, &sig()).unwrap(), &sig(), mode).unwrap())
    }

    #[test]
    fn spec_examples() {
        assert_eq!(nf("a & b", Mode::Strong), render(&parse_term("a || b + c", &sig()).unwrap()));
        assert_eq!(nf("(a + b) . c", Mode::Strong), render(&parse_term("a . c + b . c", &sig()).unwrap()));
        assert_eq!(nf("enc{a}(a)", Mode::Strong), "delta");
        assert_eq!(nf("theta(a)", Mode::Strong), "a");
        assert_eq!(nf("a . tau", Mode::Branching), "a");
        assert_eq!(nf("a . tau", Mode::Strong), "a . tau");
        assert_eq!(nf("a + a", Mode::Strong), "a");
        assert_eq!(nf("a + delta", Mode::Strong), "a");
        assert_eq!(nf("a | a", Mode::Strong), "delta");
    }

    #[test]
    fn basic_examples() {
        let p = |s| parse_term(s, &sig()).unwrap();
        assert!(is_basic(&p("a + b . c")));
        assert!(!is_basic(&p("a & b")));
        assert!(is_basic(&p("(a || b) . c")));
    }

    #[test]
    fn trace_replays() {
        let t = parse_term("theta(a + b) . (a & c)", &sig()).unwrap();
        let (r, tr) = normalize(&t, &sig(), Mode::Strong).unwrap();
        assert_eq!(tr.replay(&t), Some(r.clone()));
        assert!(is_basic(&r));
        assert!(tr.to_json_lines().lines().count() == tr.len());
    }

    #[test]
    fn recref_rejected() {
        let t = Term::seq(vec![Term::ev("a"), Term::RecRef("X".into(), "E".into())]);
        assert_eq!(normal_form(&t, &sig(), Mode::Strong), Err(RewriteError::NotClosed));
    }

    #[test]
    fn key_clash() {
        let t = parse_term("a[1] || b[2]", &sig()).unwrap();
        assert!(matches!(normal_form(&t, &sig(), Mode::Strong), Err(RewriteError::KeyClash(_))));
    }

    #[test]
    fn axiom_examples() {
        let s = sig();
        let raw = Term::Seq(vec![Term::Seq(vec![Term::ev("a"), Term::ev("b")]), Term::ev("c")]);
        let r = apply_axiom(&raw, "RA5", &[], &s).unwrap();
        assert_eq!(r, Term::Seq(vec![Term::ev("a"), Term::Seq(vec![Term::ev("b"), Term::ev("c")])]));
        let t = parse_term("a <| b", &s).unwrap();
        assert_eq!(apply_axiom(&t, "RU25", &[], &s).unwrap(), Term::tau());
        let t = parse_term("(a + b) . c[1]", &s).unwrap();
        assert!(matches!(apply_axiom(&t, "RA41", &[], &s), Err(AxiomError::SideConditionFailed(_))));
        let t = parse_term("a . b", &s).unwrap();
        assert!(matches!(apply_axiom(&t, "RA41", &[], &s), Err(AxiomError::NoMatch(_))));
    }

    #[test]
    fn lpo_examples() {
        let p = Precedence::default();
        let s = parse_term("(a + b) . c", &sig()).unwrap();
        let t = parse_term("a . c + b . c", &sig()).unwrap();
        assert!(lpo_greater(&s, &t, &p));
        assert!(!lpo_greater(&s, &s, &p));
        let a = Term::ev("a");
        let aa = Term::Choice(vec![a.clone(), a.clone()]);
        assert!(!lpo_greater(&a, &aa, &p));
        assert!(lpo_greater(&aa, &a, &p));
    }
}
