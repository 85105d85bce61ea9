//! Randomized axiom-soundness suite: every shipped rule, instantiated with
//! closed terms, checked as an equation on the LTSs of both sides.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equivalence::{check, EquivKind};
use crate::gen::{TermGen, Weights};
use crate::rewriter::{apply_axiom, normal_form, rule_patterns, AxiomError, Mode, RulePattern};
use crate::semantics::{build_lts_with, Budget, LtsOptions};
use crate::syntax::render;
use crate::term::{canonicalize, is_std, strip_keys, Label, Signature, Term};

/// Rejection-sampling cap per instance.
pub const MAX_TRIES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub instances: usize,
    pub pomset_k: usize,
    /// Check the silent-step and abstraction rules under fr-step instead.
    pub wrong_kind: bool,
    /// Restrict to these rule ids; empty means all.
    pub only: Vec<String>,
    pub strict_paper_sos: bool,
}

impl SuiteOptions {
    pub fn new(seed: u64, instances: usize) -> SuiteOptions {
        SuiteOptions { seed, instances, pomset_k: 4, wrong_kind: false, only: vec![], strict_paper_sos: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub instance: usize,
    pub lhs: String,
    pub rhs: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomResult {
    pub axiom: String,
    pub kind: String,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    /// Instances for which no side-condition-satisfying sample was found.
    pub unsampled: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub instances: usize,
    pub results: Vec<AxiomResult>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.results.iter().map(|r| r.failed + r.unsampled).sum()
    }

    pub fn ok(&self) -> bool {
        self.failures() == 0
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("seed {} instances {}\n", self.seed, self.instances);
        for r in &self.results {
            out.push_str(&format!("{:<8} {:<16} {}/{}", r.axiom, r.kind, r.passed, r.instances));
            if r.unsampled > 0 {
                out.push_str(&format!(" unsampled {}", r.unsampled));
            }
            if let Some(c) = &r.counterexample {
                out.push_str(&format!("  #{} {}  vs  {}  ({})", c.instance, c.lhs, c.rhs, c.reason));
            }
            out.push('\n');
        }
        out.push_str(&format!("failures {}\n", self.failures()));
        out
    }
}

/// Whether a rule belongs to the silent-step or abstraction family.
pub fn is_branching_rule(id: &str) -> bool {
    ["RB", "RRB", "RTI", "RRTI"].iter().any(|p| id.starts_with(p))
}

/// Kinds an axiom is checked under.
pub fn governing_kinds(id: &str, k: usize) -> Vec<EquivKind> {
    if is_branching_rule(id) {
        vec![EquivKind::RbFrStep, EquivKind::RbFrPomset(k), EquivKind::RbFrHp]
    } else {
        vec![EquivKind::FrStep, EquivKind::FrPomset(k), EquivKind::FrHp]
    }
}

/// Suite alphabet: a, b, c with γ(a,b)=c, a ♯ b and b < c.
pub fn suite_signature() -> Signature {
    Signature::suite()
}

struct Instantiator<'a> {
    gen: TermGen,
    sig: &'a Signature,
}

impl Instantiator<'_> {
    fn var<R: Rng>(&self, rng: &mut R) -> Option<Term> {
        let depth = rng.gen_range(1..=2);
        if rng.gen_bool(0.5) {
            Some(self.gen.term(rng, depth))
        } else {
            self.gen.executed(rng, depth, 3, self.sig)
        }
    }

    fn atom<R: Rng>(&self, rng: &mut R) -> Term {
        if rng.gen_bool(0.5) {
            self.gen.event(rng)
        } else {
            self.gen.history(rng, 3)
        }
    }

    fn subst(&self, p: &Term, sigma: &BTreeMap<String, Term>, set: &BTreeSet<Label>) -> Term {
        match p {
            Term::RecRef(v, _) => sigma[v].clone(),
            Term::Encap(_, x) => Term::encap(set.clone(), self.subst(x, sigma, set)),
            Term::Abstract(_, x) => Term::hide(set.clone(), self.subst(x, sigma, set)),
            _ => {
                let kids: Vec<Term> = p.children().into_iter().map(|c| self.subst(c, sigma, set)).collect();
                if kids.is_empty() {
                    p.clone()
                } else {
                    p.with_children(kids)
                }
            }
        }
    }

    /// One instance `(lhs, rhs)` satisfying the rule's side conditions.
    fn sample<R: Rng>(&self, rng: &mut R, rule: &RulePattern) -> Option<(Term, Term)> {
        // canonical forms collapse these redexes, so the pattern gives the contractum
        let by_pattern = matches!(rule.id, "RA3" | "RA6");
        for _ in 0..MAX_TRIES {
            let mut sigma = BTreeMap::new();
            let mut ok = true;
            for v in ["x", "y", "z"] {
                match self.var(rng) {
                    Some(t) => {
                        sigma.insert(v.to_string(), t);
                    }
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            for v in ["e1", "e2", "e3"] {
                sigma.insert(v.to_string(), self.atom(rng));
            }
            let set = self.gen.label_set(rng);
            let lhs = self.subst(&rule.lhs, &sigma, &set);
            if !reachable(&lhs, self.sig) {
                continue;
            }
            match apply_axiom(&lhs, rule.id, &[], self.sig) {
                Ok(rhs) => return Some((lhs, rhs)),
                Err(AxiomError::NoMatch(_)) if by_pattern => {
                    return Some((lhs, self.subst(&rule.rhs, &sigma, &set)));
                }
                Err(_) => continue,
            }
        }
        None
    }
}

/// Whether `t` is a state some execution of its key-free version reaches.
/// States are compared up to canonical form, or up to normal form when `t`
/// holds operators whose states the explorer only reaches through rewriting.
pub fn reachable(t: &Term, sig: &Signature) -> bool {
    if is_std(t) {
        return true;
    }
    let mut raw = false;
    t.walk(&mut |u| raw |= matches!(u, Term::Comm(..) | Term::Between(..) | Term::ConflictElim(_) | Term::Unless(..)));
    let view = |u: &Term| if raw { normal_form(u, sig, Mode::Strong).ok() } else { Some(canonicalize(u)) };
    let Some(target) = view(t) else { return false };
    let mut opts = LtsOptions::new(Budget { max_states: 5000, max_key: t.max_key() });
    opts.truncate = true;
    opts.normalize = false;
    let Ok(l) = build_lts_with(&strip_keys(t), sig, &BTreeMap::new(), &opts) else { return false };
    l.states.iter().filter(|s| s.max_key() == t.max_key()).any(|s| view(s).is_some_and(|n| n == target))
}

fn seed_for(seed: u64, id: &str) -> u64 {
    // FNV-1a over the rule id, mixed with the suite seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn run_rule(rule: &RulePattern, opts: &SuiteOptions, sig: &Signature) -> Vec<AxiomResult> {
    let kinds = if opts.wrong_kind && is_branching_rule(rule.id) {
        vec![EquivKind::FrStep]
    } else {
        governing_kinds(rule.id, opts.pomset_k)
    };
    let weights = Weights::eliminable().with_tau(1);
    let inst = Instantiator { gen: TermGen::new(&["a", "b", "c"], weights), sig };
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(opts.seed, rule.id));
    let mut results: Vec<AxiomResult> = kinds
        .iter()
        .map(|k| AxiomResult {
            axiom: rule.id.to_string(),
            kind: k.to_string(),
            instances: opts.instances,
            passed: 0,
            failed: 0,
            unsampled: 0,
            counterexample: None,
        })
        .collect();
    let mut lts_opts = LtsOptions::new(Budget::default());
    lts_opts.normalize = false;
    lts_opts.strict_paper_sos = opts.strict_paper_sos;
    for i in 0..opts.instances {
        let Some((lhs, rhs)) = inst.sample(&mut rng, rule) else {
            results.iter_mut().for_each(|r| r.unsampled += 1);
            continue;
        };
        let specs = BTreeMap::new();
        let l1 = build_lts_with(&lhs, sig, &specs, &lts_opts);
        let l2 = build_lts_with(&rhs, sig, &specs, &lts_opts);
        for (r, &k) in results.iter_mut().zip(&kinds) {
            let outcome = match (&l1, &l2) {
                (Ok(a), Ok(b)) => match check(a, b, k) {
                    Ok(v) if v.equivalent => Ok(()),
                    Ok(_) => Err("inequivalent".to_string()),
                    Err(e) => Err(e.to_string()),
                },
                (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
            };
            match outcome {
                Ok(()) => r.passed += 1,
                Err(reason) => {
                    r.failed += 1;
                    if r.counterexample.is_none() {
                        r.counterexample =
                            Some(Counterexample { instance: i, lhs: render(&lhs), rhs: render(&rhs), reason });
                    }
                }
            }
        }
    }
    results
}

/// Runs the suite. Rules are processed in parallel; the report is sorted by
/// rule id and kind, so it depends only on the options.
pub fn prove_axioms(opts: &SuiteOptions) -> SuiteReport {
    let sig = suite_signature();
    let rules: Vec<RulePattern> =
        rule_patterns().into_iter().filter(|r| opts.only.is_empty() || opts.only.iter().any(|o| o == r.id)).collect();
    let mut results: Vec<AxiomResult> =
        if opts.instances == 0 { vec![] } else { rules.par_iter().flat_map(|r| run_rule(r, opts, &sig)).collect() };
    results.sort_by(|a, b| (&a.axiom, &a.kind).cmp(&(&b.axiom, &b.kind)));
    SuiteReport { seed: opts.seed, instances: opts.instances, results }
}
