use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use serde_json::{json, Value};

use crate::equivalence::{check, EquivKind};
use crate::rewriter::{normal_form_open, Mode};
use crate::semantics::{build_lts_with, Budget, LtsOptions, SemanticsError};
use crate::syntax::render_body;
use crate::term::{tau_label, Label, Signature, Term};

use super::spec::{linear_shapes, validate_spec_in, RecError, RecSpec, Setting, Shape};

/// Key depth used to verify CFAR results. Verification retries at smaller
/// depths, down to 3, when the state budget runs out.
pub const CFAR_DEPTH: u32 = 6;

const CFAR_MIN_DEPTH: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub vars: Vec<String>,
    pub exits: Vec<Term>,
}

impl Cluster {
    pub fn to_json(&self) -> Value {
        json!({
            "cluster": self.vars,
            "exits": self.exits.iter().map(render_body).collect::<Vec<_>>(),
        })
    }
}

fn silent_under(b: &Term, i: &BTreeSet<Label>) -> bool {
    let tau = tau_label();
    let mut ok = true;
    b.walk(&mut |t| match t {
        Term::Event(e) if !i.contains(&e.label) && e.label != tau => ok = false,
        Term::Delta => ok = false,
        _ => {}
    });
    ok
}

fn shape_parts(s: &Shape) -> (&Term, Option<&String>) {
    match s {
        Shape::Forward(b, y) | Shape::Reversed(b, y) => (b, y.as_ref()),
    }
}

fn shape_term(s: &Shape, spec: &str) -> Term {
    match s {
        Shape::Forward(b, None) | Shape::Reversed(b, None) => b.clone(),
        Shape::Forward(b, Some(y)) => Term::seq(vec![b.clone(), Term::RecRef(y.clone(), spec.to_string())]),
        Shape::Reversed(b, Some(y)) => Term::seq(vec![Term::RecRef(y.clone(), spec.to_string()), b.clone()]),
    }
}

fn shapes_of(e: &RecSpec) -> Result<BTreeMap<String, Vec<Shape>>, RecError> {
    let c = validate_spec_in(e, Setting::TauFree);
    if !c.guarded {
        return Err(RecError::Unguarded);
    }
    if !c.linear {
        return Err(RecError::NotLinear);
    }
    let mut out = BTreeMap::new();
    for (v, t) in &e.equations {
        out.insert(v.clone(), linear_shapes(t).ok_or(RecError::NotLinear)?);
    }
    Ok(out)
}

/// Clusters of `e` for the abstraction set `i`: strongly connected groups of
/// variables linked by summands whose actions are all in `i` or τ.
pub fn find_clusters(e: &RecSpec, i: &BTreeSet<Label>) -> Result<Vec<Cluster>, RecError> {
    Ok(clusters_with_shapes(e, i)?.into_iter().map(|(c, _)| c).collect())
}

fn clusters_with_shapes(e: &RecSpec, i: &BTreeSet<Label>) -> Result<Vec<(Cluster, Vec<Shape>)>, RecError> {
    let shapes = shapes_of(e)?;
    let mut g = DiGraph::<String, ()>::new();
    let nodes: BTreeMap<String, _> = e.vars().into_iter().map(|v| (v.clone(), g.add_node(v))).collect();
    for (v, ss) in &shapes {
        for s in ss {
            let (b, y) = shape_parts(s);
            if let Some(y) = y {
                let Some(&to) = nodes.get(y) else { return Err(RecError::UnknownVariable(y.clone())) };
                if silent_under(b, i) {
                    g.add_edge(nodes[v], to, ());
                }
            }
        }
    }
    let order: Vec<String> = e.vars();
    let mut out = Vec::new();
    for comp in tarjan_scc(&g) {
        let members: BTreeSet<String> = comp.iter().map(|&n| g[n].clone()).collect();
        let mut vars: Vec<String> = members.iter().cloned().collect();
        vars.sort_by_key(|v| order.iter().position(|o| o == v));
        let mut exits = Vec::new();
        for v in &vars {
            for s in &shapes[v] {
                let (b, y) = shape_parts(s);
                let internal = silent_under(b, i) && y.is_some_and(|y| members.contains(y));
                if !internal && !exits.contains(s) {
                    exits.push(s.clone());
                }
            }
        }
        let cluster = Cluster { vars, exits: exits.iter().map(|s| shape_term(s, &e.name)).collect() };
        out.push((cluster, exits));
    }
    out.sort_by_key(|(c, _)| order.iter().position(|o| *o == c.vars[0]));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CfarResult {
    pub cluster: Cluster,
    /// Replacement for `τ . τ_I(⟨x|e⟩)`.
    pub result: Term,
    /// The cluster has no exits, so the abstracted loop never terminates.
    pub divergent: bool,
    /// Rooted branching step equivalence held on LTSs cut at `depth`.
    pub verified: bool,
    /// Key depth of the verification; 0 when it was not attempted.
    pub depth: u32,
}

impl CfarResult {
    pub fn to_json(&self) -> Value {
        json!({
            "cluster": self.cluster.to_json(),
            "result": crate::syntax::render(&self.result),
            "divergent": self.divergent,
            "verified": self.verified,
            "depth": self.depth,
        })
    }
}

/// Collapses the cluster of `x` under `τ_I`: `τ . τ_I(⟨x|e⟩)` becomes
/// `τ . τ_I(exits)`, or `τ_I(exits) . τ` for reverse-form exits.
pub fn apply_cfar(e: &RecSpec, x: &str, i: &BTreeSet<Label>, sig: &Signature) -> Result<CfarResult, RecError> {
    if e.body(x).is_none() {
        return Err(RecError::UnknownVariable(x.to_string()));
    }
    let clusters = clusters_with_shapes(e, i)?;
    let (cluster, exits) =
        clusters.into_iter().find(|(c, _)| c.vars.iter().any(|v| v == x)).ok_or(RecError::NoCluster)?;
    let fwd = exits.iter().all(|s| matches!(s, Shape::Forward(..)));
    let rev = exits.iter().all(|s| matches!(s, Shape::Reversed(..)));
    if !fwd && !rev {
        return Err(RecError::MixedExitForms);
    }
    let sum = if cluster.exits.is_empty() { Term::Delta } else { Term::choice(cluster.exits.clone()) };
    let hidden = Term::hide(i.clone(), sum);
    let raw = if fwd { Term::seq(vec![Term::tau(), hidden]) } else { Term::seq(vec![hidden, Term::tau()]) };
    let result = normal_form_open(&raw, sig, Mode::Branching).unwrap_or(raw);
    let lhs = Term::seq(vec![Term::tau(), Term::hide(i.clone(), e.reference(x))]);
    let (verified, depth) = if fwd { verify(&lhs, &result, e, sig)? } else { (false, 0) };
    Ok(CfarResult { cluster, result, divergent: exits.is_empty(), verified, depth })
}

fn verify(lhs: &Term, rhs: &Term, e: &RecSpec, sig: &Signature) -> Result<(bool, u32), RecError> {
    let specs = BTreeMap::from([(e.name.clone(), e.clone())]);
    let mut depth = CFAR_DEPTH;
    loop {
        let mut opts = LtsOptions::new(Budget { max_states: 20_000, max_key: depth });
        opts.truncate = true;
        let built =
            build_lts_with(lhs, sig, &specs, &opts).and_then(|l1| Ok((l1, build_lts_with(rhs, sig, &specs, &opts)?)));
        match built {
            Ok((l1, l2)) => {
                let v = check(&l1, &l2, EquivKind::RbFrStep).map_err(|err| RecError::Bounded(err.to_string()))?;
                return Ok((v.equivalent, depth));
            }
            Err(SemanticsError::StateLimitExceeded(_)) if depth > CFAR_MIN_DEPTH => depth -= 1,
            Err(err) => return Err(RecError::Bounded(err.to_string())),
        }
    }
}
