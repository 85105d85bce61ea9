//! Root rewrite rules over canonical terms.
//!
//! Each rule function inspects the root of a canonical term and returns every
//! way it can fire. Results are canonicalized by the caller.

use std::collections::BTreeSet;

use crate::term::{canonicalize, is_nstd, is_std, std_status, EventInstance, Label, Signature, StdStatus, Term};

use super::basic::{is_basic_with, BasicMode};

/// Which rule set is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    /// Rules sound for strong FR equivalences.
    Strong,
    /// Adds B1/RB1/B2/RB2/B3 for rooted-branching reasoning.
    Branching,
}

pub(crate) struct Ctx<'a> {
    pub sig: &'a Signature,
    pub mode: Mode,
    /// Treat recursion references as opaque basic items.
    pub open: bool,
    /// Allow `x . delta = delta` for executed `x`. It discards histories a
    /// reverse step would need, so only explicit axiom application uses it.
    pub drop_histories: bool,
}

impl Ctx<'_> {
    fn basic(&self, t: &Term) -> bool {
        is_basic_with(t, if self.open { BasicMode::Open } else { BasicMode::Closed })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Attempt {
    Fired(Term),
    SideFail,
    KeyClash,
}

pub(crate) type Hits = Vec<(&'static str, Attempt)>;

/// All rule attempts at the root, in priority order.
pub(crate) fn root_attempts(t: &Term, ctx: &Ctx) -> Hits {
    let mut out = Hits::new();
    match t {
        Term::Choice(v) => choice_rules(v, &mut out),
        Term::Seq(v) => seq_rules(v, ctx, &mut out),
        Term::Par(v) => par_rules(v, ctx, &mut out),
        Term::Comm(x, y) => comm_rules(x, y, ctx, &mut out),
        Term::Between(x, y) => out.push((
            "RP1",
            Attempt::Fired(Term::choice(vec![Term::par(vec![(**x).clone(), (**y).clone()]), t_comm(x, y)])),
        )),
        Term::ConflictElim(x) => theta_rules(x, ctx, &mut out),
        Term::Unless(x, y) => unless_rules(x, y, ctx, &mut out),
        Term::Encap(h, x) => encap_rules(h, x, ctx, &mut out),
        Term::Abstract(i, x) => abstract_rules(i, x, ctx, &mut out),
        _ => {}
    }
    out
}

fn t_comm(x: &Term, y: &Term) -> Term {
    Term::comm(x.clone(), y.clone())
}

fn fire(out: &mut Hits, id: &'static str, t: Term) {
    out.push((id, Attempt::Fired(canonicalize(&t))));
}

fn choice_rules(v: &[Term], out: &mut Hits) {
    if v.contains(&Term::Delta) {
        let rest: Vec<Term> = v.iter().filter(|c| **c != Term::Delta).cloned().collect();
        fire(out, "RA6", if rest.is_empty() { Term::Delta } else { Term::choice(rest) });
    }
    for i in 0..v.len().saturating_sub(1) {
        if v[i] == v[i + 1] {
            let mut rest = v.to_vec();
            rest.remove(i);
            fire(out, "RA3", Term::choice(rest));
        }
    }
}

fn slice_status(items: &[Term]) -> StdStatus {
    if items.len() == 1 {
        std_status(&items[0])
    } else {
        std_status(&Term::Seq(items.to_vec()))
    }
}

fn splice(v: &[Term], from: usize, to: usize, mid: Term) -> Term {
    let mut items: Vec<Term> = v[..from].to_vec();
    items.push(mid);
    items.extend_from_slice(&v[to..]);
    Term::seq(items)
}

fn summands(t: &Term) -> Vec<Term> {
    match t {
        Term::Choice(v) => v.clone(),
        other => vec![other.clone()],
    }
}

/// Removes `sub` from `all` as multisets; `None` if not contained.
fn multiset_minus(all: &[Term], sub: &[Term]) -> Option<Vec<Term>> {
    let mut rest = all.to_vec();
    for s in sub {
        let pos = rest.iter().position(|r| r == s)?;
        rest.remove(pos);
    }
    Some(rest)
}

fn seq_rules(v: &[Term], ctx: &Ctx, out: &mut Hits) {
    let n = v.len();
    for i in 0..n {
        if v[i] == Term::Delta && i + 1 < n {
            for j in (i + 2..=n).rev() {
                if slice_status(&v[i + 1..j]) == StdStatus::Std {
                    fire(out, "BA.A7f", splice(v, i, j, Term::Delta));
                } else {
                    out.push(("BA.A7f", Attempt::SideFail));
                }
            }
        }
    }
    for i in 1..n {
        if ctx.drop_histories && v[i] == Term::Delta {
            for k in 0..i {
                if slice_status(&v[k..i]) == StdStatus::NStd {
                    fire(out, "BA.A7r", splice(v, k, i + 1, Term::Delta));
                } else {
                    out.push(("BA.A7r", Attempt::SideFail));
                }
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        if let Term::Choice(alts) = &v[i] {
            for j in (i + 2..=n).rev() {
                let z = &v[i + 1..j];
                if is_std(&v[i]) && slice_status(z) == StdStatus::Std {
                    let dist = alts
                        .iter()
                        .map(|a| {
                            let mut items = vec![a.clone()];
                            items.extend_from_slice(z);
                            Term::seq(items)
                        })
                        .collect();
                    fire(out, "RA41", splice(v, i, j, Term::choice(dist)));
                } else {
                    out.push(("RA41", Attempt::SideFail));
                }
            }
        }
    }
    for i in 1..n {
        if let Term::Choice(alts) = &v[i] {
            for k in 0..i {
                let x = &v[k..i];
                if is_nstd(&v[i]) && slice_status(x) == StdStatus::NStd {
                    let dist = alts
                        .iter()
                        .map(|a| {
                            let mut items = x.to_vec();
                            items.push(a.clone());
                            Term::seq(items)
                        })
                        .collect();
                    fire(out, "RA42", splice(v, k, i + 1, Term::choice(dist)));
                } else {
                    out.push(("RA42", Attempt::SideFail));
                }
            }
        }
    }
    if ctx.mode != Mode::Branching {
        return;
    }
    for i in 0..n.saturating_sub(1) {
        if matches!(&v[i], Term::Event(EventInstance { key: None, .. })) && v[i + 1] == Term::Tau(None) {
            fire(out, "RB1", splice(v, i, i + 2, v[i].clone()));
        }
        if matches!(v[i], Term::Tau(_)) && matches!(&v[i + 1], Term::Event(EventInstance { key: Some(_), .. })) {
            fire(out, "RRB1", splice(v, i, i + 2, v[i + 1].clone()));
        }
        // e . (tau . (x + y) + x) -> e . (x + y)
        if let (Term::Event(EventInstance { key: None, .. }), Term::Choice(alts)) = (&v[i], &v[i + 1]) {
            for (si, s) in alts.iter().enumerate() {
                if let Term::Seq(parts) = s {
                    if parts.len() == 2 && parts[0] == Term::Tau(None) {
                        let inner = summands(&parts[1]);
                        let mut others = alts.clone();
                        others.remove(si);
                        if let Some(y) = multiset_minus(&inner, &others) {
                            if !y.is_empty() && !others.is_empty() {
                                fire(out, "RB2", splice(v, i + 1, i + 2, parts[1].clone()));
                            }
                        }
                    }
                }
            }
        }
        // ((x + y) . tau + x) . e[m] -> (x + y) . e[m]
        if let (Term::Choice(alts), Term::Event(EventInstance { key: Some(_), .. })) = (&v[i], &v[i + 1]) {
            for (si, s) in alts.iter().enumerate() {
                if let Term::Seq(parts) = s {
                    if parts.len() == 2 && matches!(parts[1], Term::Tau(_)) {
                        let inner = summands(&parts[0]);
                        let mut others = alts.clone();
                        others.remove(si);
                        if let Some(y) = multiset_minus(&inner, &others) {
                            if !y.is_empty() && !others.is_empty() {
                                fire(out, "RRB2", splice(v, i, i + 1, parts[0].clone()));
                            }
                        }
                    }
                }
            }
        }
    }
}

fn block_atoms(t: &Term) -> Option<Vec<Term>> {
    match t {
        Term::Event(_) | Term::Tau(_) => Some(vec![t.clone()]),
        Term::Par(v) if v.iter().all(|c| matches!(c, Term::Event(_) | Term::Tau(_))) => Some(v.clone()),
        _ => None,
    }
}

fn atom_key(t: &Term) -> Option<u32> {
    match t {
        Term::Event(e) => e.key,
        Term::Tau(k) => *k,
        _ => None,
    }
}

/// Key shared by all atoms: `Ok(None)` all standard, `Ok(Some(k))` all keyed `k`.
fn shared_key(atoms: &[Term]) -> Result<Option<u32>, ()> {
    let keys: BTreeSet<Option<u32>> = atoms.iter().map(atom_key).collect();
    if keys.len() == 1 {
        Ok(*keys.iter().next().expect("one key"))
    } else {
        Err(())
    }
}

fn nest_between(mut parts: Vec<Term>) -> Option<Term> {
    if parts.is_empty() {
        return None;
    }
    let first = parts.remove(0);
    Some(parts.into_iter().fold(first, Term::between))
}

fn par_rules(v: &[Term], ctx: &Ctx, out: &mut Hits) {
    if v.contains(&Term::Delta) {
        fire(out, if v[0] == Term::Delta { "RP9" } else { "RP10" }, Term::Delta);
    }
    for (i, c) in v.iter().enumerate() {
        if let Term::Choice(alts) = c {
            let dist = alts
                .iter()
                .map(|a| {
                    let mut items = v.to_vec();
                    items[i] = a.clone();
                    Term::par(items)
                })
                .collect();
            fire(out, if i == 0 { "RP7" } else { "RP8" }, Term::choice(dist));
        }
    }
    if ctx.mode == Mode::Branching && v.contains(&Term::Tau(None)) {
        let rest: Vec<Term> = v.iter().filter(|c| **c != Term::Tau(None)).cloned().collect();
        fire(out, "RB3", if rest.is_empty() { Term::Tau(None) } else { Term::par(rest) });
    }
    if v.iter().any(|c| matches!(c, Term::Choice(_) | Term::Delta)) {
        return;
    }
    if v.iter().all(|c| matches!(c, Term::Event(_) | Term::Tau(_))) {
        if shared_key(v).is_err() {
            out.push(("KEY", Attempt::KeyClash));
        }
        return;
    }
    if !v.iter().any(|c| matches!(c, Term::Seq(_))) {
        return;
    }
    let tails_id = |tails: usize, seq_first: bool, rev: bool| match (tails, seq_first, rev) {
        (1, true, false) => "RP5",
        (1, false, false) => "RP4",
        (_, _, false) => "RP6",
        (1, true, true) => "RRP5",
        (1, false, true) => "RRP4",
        (_, _, true) => "RRP6",
    };
    if v.iter().all(is_std) {
        let mut heads = Vec::new();
        let mut tails = Vec::new();
        for c in v {
            match c {
                Term::Seq(items) => {
                    let Some(atoms) = block_atoms(&items[0]) else { return };
                    heads.extend(atoms);
                    tails.push(Term::seq(items[1..].to_vec()));
                }
                other => heads.push(other.clone()),
            }
        }
        let seq_first = matches!(v[0], Term::Seq(_));
        let id = tails_id(tails.len(), seq_first, false);
        let mut items = vec![Term::par(heads)];
        items.extend(nest_between(tails));
        fire(out, id, Term::seq(items));
    } else if v.iter().all(is_nstd) {
        let mut lasts = Vec::new();
        let mut prefixes = Vec::new();
        for c in v {
            match c {
                Term::Seq(items) => {
                    let Some(atoms) = block_atoms(&items[items.len() - 1]) else { return };
                    lasts.extend(atoms);
                    prefixes.push(Term::seq(items[..items.len() - 1].to_vec()));
                }
                other => lasts.push(other.clone()),
            }
        }
        if shared_key(&lasts).is_err() {
            out.push(("KEY", Attempt::KeyClash));
            return;
        }
        let seq_first = matches!(v[0], Term::Seq(_));
        let id = tails_id(prefixes.len(), seq_first, true);
        let mut items: Vec<Term> = nest_between(prefixes).into_iter().collect();
        items.push(Term::par(lasts));
        fire(out, id, Term::seq(items));
    }
}

fn split_head(t: &Term) -> Option<(Term, Option<Term>)> {
    match t {
        Term::Seq(items) => Some((items[0].clone(), Some(Term::seq(items[1..].to_vec())))),
        Term::Event(_) | Term::Tau(_) | Term::Par(_) => Some((t.clone(), None)),
        _ => None,
    }
}

fn split_last(t: &Term) -> Option<(Option<Term>, Term)> {
    match t {
        Term::Seq(items) => {
            let n = items.len();
            Some((Some(Term::seq(items[..n - 1].to_vec())), items[n - 1].clone()))
        }
        Term::Event(_) | Term::Tau(_) | Term::Par(_) => Some((None, t.clone())),
        _ => None,
    }
}

/// γ on two atoms: an event when defined, δ otherwise (τ and blocks never communicate).
pub(crate) fn comm_atoms(x: &Term, y: &Term, sig: &Signature) -> Term {
    match (x, y) {
        (Term::Event(a), Term::Event(b)) => match sig.gamma(&a.label, &b.label) {
            Some(c) => Term::Event(EventInstance { label: c.clone(), key: a.key }),
            None => Term::Delta,
        },
        _ => Term::Delta,
    }
}

fn comm_rules(x: &Term, y: &Term, ctx: &Ctx, out: &mut Hits) {
    if *x == Term::Delta {
        fire(out, "RC17", Term::Delta);
    }
    if *y == Term::Delta {
        fire(out, "RC18", Term::Delta);
    }
    if let Term::Choice(alts) = x {
        fire(out, "RC15", Term::choice(alts.iter().map(|a| t_comm(a, y)).collect()));
    }
    if let Term::Choice(alts) = y {
        fire(out, "RC16", Term::choice(alts.iter().map(|a| t_comm(x, a)).collect()));
    }
    if matches!(x, Term::Choice(_) | Term::Delta) || matches!(y, Term::Choice(_) | Term::Delta) {
        return;
    }
    let ids_fwd = ["RC11", "RC12", "RC13", "RC14"];
    let ids_rev = ["RRC11", "RRC12", "RRC13", "RRC14"];
    let pick = |ids: [&'static str; 4], t1: bool, t2: bool| match (t1, t2) {
        (false, false) => ids[0],
        (false, true) => ids[1],
        (true, false) => ids[2],
        (true, true) => ids[3],
    };
    if is_std(x) && is_std(y) {
        let (Some((h1, t1)), Some((h2, t2))) = (split_head(x), split_head(y)) else { return };
        let c = comm_atoms(&h1, &h2, ctx.sig);
        let id = pick(ids_fwd, t1.is_some(), t2.is_some());
        let mut items = vec![c];
        match (t1, t2) {
            (Some(a), Some(b)) => items.push(Term::between(a, b)),
            (Some(a), None) | (None, Some(a)) => items.push(a),
            (None, None) => {}
        }
        fire(out, id, Term::seq(items));
    } else if is_nstd(x) && is_nstd(y) {
        let (Some((p1, l1)), Some((p2, l2))) = (split_last(x), split_last(y)) else { return };
        if atom_key(&l1) != atom_key(&l2) && block_atoms(&l1).is_some() && block_atoms(&l2).is_some() {
            let k1 = block_atoms(&l1).and_then(|a| shared_key(&a).ok()).flatten();
            let k2 = block_atoms(&l2).and_then(|a| shared_key(&a).ok()).flatten();
            if k1 != k2 {
                out.push(("KEY", Attempt::KeyClash));
                return;
            }
        }
        let c = comm_atoms(&l1, &l2, ctx.sig);
        let id = pick(ids_rev, p1.is_some(), p2.is_some());
        let mut items = Vec::new();
        match (p1, p2) {
            (Some(a), Some(b)) => items.push(Term::between(a, b)),
            (Some(a), None) | (None, Some(a)) => items.push(a),
            (None, None) => {}
        }
        items.push(c);
        fire(out, id, Term::seq(items));
    }
}

fn theta_rules(x: &Term, ctx: &Ctx, out: &mut Hits) {
    if !ctx.basic(x) {
        out.push(("RCE", Attempt::SideFail));
        return;
    }
    let th = |t: &Term| Term::theta(t.clone());
    match x {
        Term::Event(EventInstance { key: None, .. }) | Term::Tau(None) => fire(out, "RCE19", x.clone()),
        Term::Event(_) | Term::Tau(_) => fire(out, "RRCE19", x.clone()),
        Term::Delta => fire(out, "RCE20", Term::Delta),
        Term::Choice(v) => {
            let (first, rest) = (&v[0], Term::choice(v[1..].to_vec()));
            fire(
                out,
                "RCE21",
                Term::choice(vec![Term::unless(th(first), rest.clone()), Term::unless(th(&rest), first.clone())]),
            );
        }
        Term::Seq(v) => fire(out, "RCE22", Term::seq(v.iter().map(th).collect())),
        Term::Par(v) => {
            let (first, rest) = (&v[0], Term::par(v[1..].to_vec()));
            fire(
                out,
                "RCE23",
                Term::choice(vec![
                    Term::par(vec![Term::unless(th(first), rest.clone()), rest.clone()]),
                    Term::par(vec![Term::unless(th(&rest), first.clone()), first.clone()]),
                ]),
            );
        }
        Term::Comm(a, b) => fire(
            out,
            "RCE24",
            Term::choice(vec![
                Term::comm(Term::unless(th(a), (**b).clone()), (**b).clone()),
                Term::comm(Term::unless(th(b), (**a).clone()), (**a).clone()),
            ]),
        ),
        _ => {}
    }
}

/// Atomic unless on two atoms; returns the rule id and result.
pub(crate) fn unless_atoms(l: &Term, r: &Term, sig: &Signature) -> Option<(&'static str, Term)> {
    match (l, r) {
        (_, Term::Delta) => Some(("RU28", l.clone())),
        (Term::Delta, _) => Some(("RU29", Term::Delta)),
        (Term::Tau(_), _) | (_, Term::Tau(_)) => Some(("RU.tau", l.clone())),
        (Term::Event(el), Term::Event(er)) => {
            let keyed = el.key.is_some();
            let tau = Term::Tau(el.key);
            if sig.in_conflict(&el.label, &er.label) {
                return Some((if keyed { "RRU25" } else { "RU25" }, tau));
            }
            // e2 ranges over the alphabet; histories use the reversed order
            let related = |e2: &Label, other: &Label| if keyed { sig.leq(other, e2) } else { sig.leq(e2, other) };
            if sig.alphabet.iter().any(|e2| sig.in_conflict(&er.label, e2) && related(e2, &el.label)) {
                return Some((if keyed { "RRU27" } else { "RU27" }, tau));
            }
            if sig.alphabet.iter().any(|e2| sig.in_conflict(&el.label, e2) && related(e2, &er.label)) {
                return Some((if keyed { "RRU26" } else { "RU26" }, l.clone()));
            }
            Some(("RU.keep", l.clone()))
        }
        _ => None,
    }
}

fn unless_rules(x: &Term, y: &Term, ctx: &Ctx, out: &mut Hits) {
    if !ctx.basic(x) || !ctx.basic(y) {
        out.push(("RU", Attempt::SideFail));
        return;
    }
    let un = |a: &Term, b: &Term| Term::unless(a.clone(), b.clone());
    let list_rest = |v: &[Term], mk: fn(Vec<Term>) -> Term| mk(v[1..].to_vec());
    match y {
        Term::Choice(v) => fire(out, "RU34", un(&un(x, &v[0]), &list_rest(v, Term::choice))),
        Term::Seq(v) => fire(out, "RU35", un(&un(x, &v[0]), &list_rest(v, Term::seq))),
        Term::Par(v) => fire(out, "RU36", un(&un(x, &v[0]), &list_rest(v, Term::par))),
        Term::Comm(a, b) => fire(out, "RU37", un(&un(x, a), b)),
        _ => {}
    }
    match x {
        Term::Choice(v) => fire(out, "RU30", Term::choice(v.iter().map(|a| un(a, y)).collect())),
        Term::Seq(v) => fire(out, "RU31", Term::seq(v.iter().map(|a| un(a, y)).collect())),
        Term::Par(v) => fire(out, "RU32", Term::par(v.iter().map(|a| un(a, y)).collect())),
        Term::Comm(a, b) => fire(out, "RU33", Term::comm(un(a, y), un(b, y))),
        _ => {}
    }
    if x.is_atom() && y.is_atom() {
        if let Some((id, t)) = unless_atoms(x, y, ctx.sig) {
            fire(out, id, t);
        }
    }
}

fn encap_rules(h: &BTreeSet<Label>, x: &Term, ctx: &Ctx, out: &mut Hits) {
    if !ctx.basic(x) {
        out.push(("RD", Attempt::SideFail));
        return;
    }
    let d = |t: &Term| Term::encap(h.clone(), t.clone());
    match x {
        Term::Event(e) => {
            let hit = h.contains(&e.label);
            let id = match (hit, e.key.is_some()) {
                (false, false) => "RD1",
                (false, true) => "RRD1",
                (true, false) => "RD2",
                (true, true) => "RRD2",
            };
            fire(out, id, if hit { Term::Delta } else { x.clone() });
        }
        Term::Delta => fire(out, "RD3", Term::Delta),
        Term::Tau(_) => fire(out, "RD.tau", x.clone()),
        Term::Choice(v) => fire(out, "RD4", Term::choice(v.iter().map(d).collect())),
        Term::Seq(v) => fire(out, "RD5", Term::seq(v.iter().map(d).collect())),
        Term::Par(v) => fire(out, "RD6", Term::par(v.iter().map(d).collect())),
        _ => {}
    }
}

fn abstract_rules(i: &BTreeSet<Label>, x: &Term, ctx: &Ctx, out: &mut Hits) {
    if !ctx.basic(x) {
        out.push(("RTI", Attempt::SideFail));
        return;
    }
    let h = |t: &Term| Term::hide(i.clone(), t.clone());
    match x {
        Term::Event(e) => {
            let hit = i.contains(&e.label);
            let id = match (hit, e.key.is_some()) {
                (false, false) => "RTI1",
                (false, true) => "RRTI1",
                (true, false) => "RTI2",
                (true, true) => "RRTI2",
            };
            fire(out, id, if hit { Term::Tau(e.key) } else { x.clone() });
        }
        Term::Delta => fire(out, "RTI3", Term::Delta),
        Term::Tau(_) => fire(out, "RTI.tau", x.clone()),
        Term::Choice(v) => fire(out, "RTI4", Term::choice(v.iter().map(h).collect())),
        Term::Seq(v) => fire(out, "RTI5", Term::seq(v.iter().map(h).collect())),
        Term::Par(v) => fire(out, "RTI6", Term::par(v.iter().map(h).collect())),
        _ => {}
    }
}
