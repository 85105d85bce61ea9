use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::equivalence::{check, EquivKind};
use crate::rewriter::{is_basic, is_block, normal_form, Mode};
use crate::semantics::{build_lts_with, Budget, LtsOptions};
use crate::term::{is_nstd, is_std, Signature, Term};

use super::spec::{linear_shapes, summands, validate_spec_in, RecError, RecSpec, Setting, Shape};
use super::Direction;

/// Outcome of [`spec_equal`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SpecVerdict {
    /// Decided on the summand graph; `relation` pairs variables of both specs.
    SummandGraph { equivalent: bool, relation: Vec<(String, String)> },
    /// Compared on LTSs cut at key `depth`.
    Bounded { equivalent: bool, depth: u32 },
}

impl SpecVerdict {
    pub fn equivalent(&self) -> bool {
        match self {
            SpecVerdict::SummandGraph { equivalent, .. } | SpecVerdict::Bounded { equivalent, .. } => *equivalent,
        }
    }
}

type Summand = (Term, Option<String>);

fn forward_summands(e: &RecSpec) -> Option<BTreeMap<String, Vec<Summand>>> {
    let mut out = BTreeMap::new();
    for (v, t) in &e.equations {
        let shapes = linear_shapes(t)?;
        let mut ss = Vec::new();
        for s in shapes {
            match s {
                Shape::Forward(b, y) => ss.push((b, y)),
                Shape::Reversed(..) => return None,
            }
        }
        out.insert(v.clone(), ss);
    }
    Some(out)
}

fn summand_graph(e1: &RecSpec, x1: &str, e2: &RecSpec, x2: &str) -> Option<SpecVerdict> {
    let g1 = forward_summands(e1)?;
    let g2 = forward_summands(e2)?;
    let mut rel: BTreeSet<(String, String)> =
        g1.keys().flat_map(|a| g2.keys().map(move |b| (a.clone(), b.clone()))).collect();
    let covered = |ss: &[Summand], ts: &[Summand], rel: &BTreeSet<(String, String)>, flip: bool| {
        ss.iter().all(|(b, n)| {
            ts.iter().any(|(c, m)| {
                b == c
                    && match (n, m) {
                        (None, None) => true,
                        (Some(p), Some(q)) => {
                            let pair = if flip { (q.clone(), p.clone()) } else { (p.clone(), q.clone()) };
                            rel.contains(&pair)
                        }
                        _ => false,
                    }
            })
        })
    };
    loop {
        let bad: Vec<(String, String)> = rel
            .iter()
            .filter(|(a, b)| !(covered(&g1[a], &g2[b], &rel, false) && covered(&g2[b], &g1[a], &rel, true)))
            .cloned()
            .collect();
        if bad.is_empty() {
            break;
        }
        for p in bad {
            rel.remove(&p);
        }
    }
    let equivalent = rel.contains(&(x1.to_string(), x2.to_string()));
    Some(SpecVerdict::SummandGraph { equivalent, relation: rel.into_iter().collect() })
}

/// Compares `⟨x1|e1⟩` and `⟨x2|e2⟩` on LTSs cut at key `depth`.
pub fn bounded_spec_equal(
    e1: &RecSpec,
    x1: &str,
    e2: &RecSpec,
    x2: &str,
    sig: &Signature,
    kind: EquivKind,
    depth: u32,
) -> Result<SpecVerdict, RecError> {
    let e2 = if e2.name == e1.name { e2.renamed(&format!("{}'", e2.name)) } else { e2.clone() };
    for (e, x) in [(e1, x1), (&e2, x2)] {
        if e.body(x).is_none() {
            return Err(RecError::UnknownVariable(x.to_string()));
        }
    }
    let mut opts = LtsOptions::new(Budget { max_states: 50_000, max_key: depth });
    opts.truncate = true;
    let build = |e: &RecSpec, x: &str| {
        let specs = BTreeMap::from([(e.name.clone(), e.clone())]);
        build_lts_with(&e.reference(x), sig, &specs, &opts).map_err(|err| RecError::Bounded(err.to_string()))
    };
    let l1 = build(e1, x1)?;
    let l2 = build(&e2, x2)?;
    let v = check(&l1, &l2, kind).map_err(|err| RecError::Bounded(err.to_string()))?;
    Ok(SpecVerdict::Bounded { equivalent: v.equivalent, depth })
}

/// Decides equality of two recursive specifications. Linear forward specs
/// under strong kinds use the summand graph; everything else falls back to a
/// bounded comparison at key depth `depth`.
pub fn spec_equal(
    e1: &RecSpec,
    x1: &str,
    e2: &RecSpec,
    x2: &str,
    sig: &Signature,
    kind: EquivKind,
    depth: u32,
) -> Result<SpecVerdict, RecError> {
    let c1 = validate_spec_in(e1, Setting::Silent);
    let c2 = validate_spec_in(e2, Setting::Silent);
    if !c1.guarded || !c2.guarded {
        return Err(RecError::Unguarded);
    }
    for (e, x) in [(e1, x1), (e2, x2)] {
        if e.body(x).is_none() {
            return Err(RecError::UnknownVariable(x.to_string()));
        }
    }
    let linear_fwd = |c: super::Classification| c.linear && c.direction == Direction::Forward;
    if !kind.is_branching() && linear_fwd(c1) && linear_fwd(c2) {
        if let Some(v) = summand_graph(e1, x1, e2, x2) {
            return Ok(v);
        }
    }
    bounded_spec_equal(e1, x1, e2, x2, sig, kind, depth)
}

struct Linearizer {
    name: String,
    vars: HashMap<Term, String>,
    queue: VecDeque<(String, Term)>,
    count: usize,
}

impl Linearizer {
    fn var_for(&mut self, t: &Term) -> Term {
        let name = match self.vars.get(t) {
            Some(v) => v.clone(),
            None => {
                self.count += 1;
                let v = format!("X{}", self.count);
                self.vars.insert(t.clone(), v.clone());
                self.queue.push_back((v.clone(), t.clone()));
                v
            }
        };
        Term::RecRef(name, self.name.clone())
    }

    fn forward(&mut self, s: &Term, out: &mut Vec<Term>) -> Result<(), RecError> {
        if is_block(s) {
            out.push(s.clone());
            return Ok(());
        }
        let Term::Seq(items) = s else { return Err(RecError::NotBasic) };
        let head = &items[0];
        let rest = Term::seq(items[1..].to_vec());
        if is_block(head) {
            out.push(Term::seq(vec![head.clone(), self.var_for(&rest)]));
            return Ok(());
        }
        if let Term::Choice(hs) = head {
            for h in hs {
                self.forward(&Term::seq(vec![h.clone(), rest.clone()]), out)?;
            }
            return Ok(());
        }
        Err(RecError::NotBasic)
    }

    fn reversed(&mut self, s: &Term, out: &mut Vec<Term>) -> Result<(), RecError> {
        if is_block(s) && s.has_key() {
            out.push(s.clone());
            return Ok(());
        }
        let Term::Seq(items) = s else { return Err(RecError::NotBasic) };
        let last = &items[items.len() - 1];
        if !is_block(last) || !is_nstd(last) {
            return Err(RecError::NotBasic);
        }
        let prefix = Term::seq(items[..items.len() - 1].to_vec());
        if !is_nstd(&prefix) {
            return Err(RecError::NotBasic);
        }
        out.push(Term::seq(vec![self.var_for(&prefix), last.clone()]));
        Ok(())
    }
}

/// Turns a closed term into a linear specification; returns it with its
/// initial variable. Forward terms give `block . Y` summands, fully executed
/// histories give `Y . block[m]` summands.
pub fn linearize(t: &Term, sig: &Signature) -> Result<(RecSpec, String), RecError> {
    if t.has_recref() {
        return Err(RecError::NotBasic);
    }
    let nf = normal_form(t, sig, Mode::Strong).map_err(|_| RecError::NotBasic)?;
    if !is_basic(&nf) {
        return Err(RecError::NotBasic);
    }
    let forward = if is_std(&nf) {
        true
    } else if is_nstd(&nf) {
        false
    } else {
        return Err(RecError::NotBasic);
    };
    let mut lin = Linearizer { name: "L".to_string(), vars: HashMap::new(), queue: VecDeque::new(), count: 0 };
    lin.var_for(&nf);
    let mut equations = Vec::new();
    while let Some((v, u)) = lin.queue.pop_front() {
        let mut out = Vec::new();
        for s in summands(&u) {
            if forward {
                lin.forward(&s, &mut out)?;
            } else {
                lin.reversed(&s, &mut out)?;
            }
        }
        let body = if out.is_empty() { Term::Delta } else { Term::choice(out) };
        equations.push((v, crate::term::canonicalize(&body)));
    }
    Ok((RecSpec::new("L", equations), "X1".to_string()))
}
