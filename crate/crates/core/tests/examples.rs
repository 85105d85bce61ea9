//! Worked examples for each module, with expected values derived by hand.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{moves, naive_step_equiv, sig, t};
use rapt::equivalence::{check, hhp_check, hp_game, pomset_moves, EquivKind};
use rapt::recursion::{
    apply_cfar, find_clusters, linearize, spec_equal, unfold_rdp, validate_spec, validate_spec_in, Direction, RecError,
    Setting,
};
use rapt::rewriter::{
    apply_axiom, is_basic, lpo_greater, normal_form, normalize, AxiomError, Mode, Precedence, RewriteError,
};
use rapt::semantics::{
    build_lts, build_lts_with, forward_steps, reverse_steps, weak_closure, Budget, Dir, LtsOptions, SemanticsError,
};
use rapt::syntax::{parse_spec, parse_spec_named, parse_term, render, SyntaxError};
use rapt::term::{alphabet_of, canonicalize, configuration_of, std_status, Label, Signature, StdStatus, Term};

fn l(n: &str) -> Label {
    Label::new(n).unwrap()
}

fn labels(ns: &[&str]) -> BTreeSet<Label> {
    ns.iter().map(|n| l(n)).collect()
}

fn nf(s: &str) -> String {
    render(&normal_form(&t(s), &sig(), Mode::Strong).unwrap())
}

fn step_strings(steps: &[rapt::semantics::Step]) -> Vec<(Vec<String>, String)> {
    let mut v: Vec<(Vec<String>, String)> = steps
        .iter()
        .map(|s| {
            let ev = s.events.iter().map(|e| render(&Term::Event(e.clone()))).collect();
            (ev, render(&s.target))
        })
        .collect();
    v.sort();
    v
}

// term core

#[test]
fn canonicalize_sorts_and_flattens() {
    let (a, b, c) = (Term::ev("a"), Term::ev("b"), Term::ev("c"));
    assert_eq!(canonicalize(&Term::Choice(vec![b.clone(), a.clone()])), Term::Choice(vec![a.clone(), b.clone()]));
    let nested = Term::Choice(vec![Term::Choice(vec![a.clone(), b.clone()]), c.clone()]);
    assert_eq!(canonicalize(&nested), Term::Choice(vec![a.clone(), b.clone(), c]));
    assert_eq!(canonicalize(&Term::Par(vec![b.clone(), a.clone()])), Term::Par(vec![a, b]));
}

#[test]
fn standard_status() {
    assert_eq!(std_status(&t("a . b")), StdStatus::Std);
    assert_eq!(std_status(&t("a[1] . b[2]")), StdStatus::NStd);
    assert_eq!(std_status(&t("a[1] . b")), StdStatus::Mixed);
}

#[test]
fn configurations() {
    let c = configuration_of(&t("a[1] . b")).unwrap();
    assert_eq!(c.events, vec![(l("a"), 1)]);
    assert!(c.order.is_empty());
    let c = configuration_of(&t("a[1] . b[2]")).unwrap();
    assert_eq!(c.events, vec![(l("a"), 1), (l("b"), 2)]);
    assert_eq!(c.order, BTreeSet::from([(0, 1)]));
    let c = configuration_of(&t("a[1] || b[1]")).unwrap();
    assert_eq!(c.len(), 2);
    assert!(c.order.is_empty());
    assert!(configuration_of(&t("a & b")).is_err());
}

#[test]
fn alphabets() {
    assert_eq!(alphabet_of(&t("a . b[2]")), labels(&["a", "b"]));
    assert!(alphabet_of(&t("delta")).is_empty());
    assert_eq!(alphabet_of(&t("enc{a}(a + c)")), labels(&["a", "c"]));
}

#[test]
fn reserved_label_names_are_rejected() {
    assert!(Label::new("delta").is_err());
    assert!(Label::new("tau").is_err());
    assert!(Label::new("a").is_ok());
}

// syntax

#[test]
fn parse_terms() {
    let (a, b, c) = (Term::ev("a"), Term::ev("b"), Term::ev("c"));
    assert_eq!(t("a . b + c"), canonicalize(&Term::Choice(vec![Term::Seq(vec![a.clone(), b.clone()]), c])));
    assert_eq!(t("a[1] || b[1]"), Term::Par(vec![Term::hist("a", 1), Term::hist("b", 1)]));
    assert_eq!(t("enc{a}(a + b)"), Term::encap(labels(&["a"]), Term::Choice(vec![a, b])));
}

#[test]
fn parse_errors() {
    assert!(matches!(parse_term("a . q", &sig()), Err(SyntaxError::UnknownLabel { .. })));
    assert!(matches!(parse_term("a . ", &sig()), Err(SyntaxError::Syntax { .. })));
}

#[test]
fn parse_specs() {
    let e = parse_spec("X = a . X + b", &sig()).unwrap();
    assert_eq!(e.vars(), vec!["X".to_string()]);
    assert_eq!(render(e.body("X").unwrap()), "b + a . <X|E>");
    let e = parse_spec("X = a . Y; Y = b . X", &sig()).unwrap();
    assert_eq!(e.vars().len(), 2);
    assert_eq!(parse_spec("X = a . Z", &sig()), Err(SyntaxError::UndefinedVariable("Z".into())));
    assert_eq!(parse_spec("X = a; X = b", &sig()), Err(SyntaxError::DuplicateVariable("X".into())));
}

#[test]
fn rendering() {
    let (a, b, c) = (Term::ev("a"), Term::ev("b"), Term::ev("c"));
    assert_eq!(render(&Term::Choice(vec![a.clone(), b.clone()])), "a + b");
    assert_eq!(render(&Term::Seq(vec![a.clone(), Term::Choice(vec![b, c])])), "a . (b + c)");
    assert_eq!(render(&Term::hide(labels(&["i"]), Term::Par(vec![a, Term::ev("i")]))), "hide{i}(a || i)");
}

// rewriter

#[test]
fn normal_forms() {
    assert_eq!(t(&nf("a & b")), t("(a || b) + c"));
    assert_eq!(nf("(a + b) . c"), nf("a . c + b . c"));
    assert_eq!(t(&nf("(a + b) . c")), t("a . c + b . c"));
    assert_eq!(nf("enc{a}(a)"), "delta");
    assert_eq!(nf("enc{a}(a . b)"), "delta");
    assert_eq!(nf("theta(a)"), "a");
    assert_eq!(nf("a + a"), "a");
    assert_eq!(nf("a + delta"), "a");
    assert_eq!(render(&normal_form(&t("a . tau"), &sig(), Mode::Branching).unwrap()), "a");
    // no communication is declared for these two labels
    let bare = Signature::from_names(&["a", "b"]);
    let x = parse_term("a | b", &bare).unwrap();
    assert_eq!(normal_form(&x, &bare, Mode::Strong).unwrap(), Term::Delta);
}

#[test]
fn normalize_errors() {
    let e = parse_spec("X = a . X", &sig()).unwrap();
    assert_eq!(normalize(&e.reference("X"), &sig(), Mode::Strong).unwrap_err(), RewriteError::NotClosed);
    let clash = Term::Par(vec![Term::hist("a", 1), Term::hist("b", 2)]);
    assert!(matches!(normalize(&clash, &sig(), Mode::Strong), Err(RewriteError::KeyClash(_))));
}

#[test]
fn basic_terms() {
    assert!(is_basic(&t("a + b . c")));
    assert!(!is_basic(&t("a & b")));
    assert!(is_basic(&t("(a || b) . c")));
}

#[test]
fn path_order_examples() {
    let p = Precedence::default();
    assert!(lpo_greater(&t("(a + b) . c"), &t("a . c + b . c"), &p));
    let s = t("a . b");
    assert!(!lpo_greater(&s, &s, &p));
    assert!(!lpo_greater(&t("a"), &Term::Choice(vec![Term::ev("a"), Term::ev("a")]), &p));
}

#[test]
fn single_axiom_steps() {
    let x = Term::Seq(vec![Term::Seq(vec![Term::ev("a"), Term::ev("b")]), Term::ev("c")]);
    let y = apply_axiom(&x, "RA5", &[], &sig()).unwrap();
    assert_eq!(y, Term::Seq(vec![Term::ev("a"), Term::Seq(vec![Term::ev("b"), Term::ev("c")])]));
    // a and b are in conflict in the suite signature
    let u = Term::unless(Term::ev("a"), Term::ev("b"));
    assert_eq!(apply_axiom(&u, "RU25", &[], &sig()).unwrap(), Term::tau());
    let d = Term::Seq(vec![Term::Choice(vec![Term::ev("a"), Term::ev("b")]), Term::hist("c", 1)]);
    assert!(matches!(apply_axiom(&d, "RA41", &[], &sig()), Err(AxiomError::SideConditionFailed(_))));
    assert!(matches!(apply_axiom(&t("a"), "RA5", &[], &sig()), Err(AxiomError::NoMatch(_))));
}

// semantics

#[test]
fn forward_moves() {
    let s = sig();
    assert_eq!(step_strings(&forward_steps(&t("a"), &s, 1)), vec![(vec!["a[1]".into()], "a[1]".into())]);
    assert_eq!(
        step_strings(&forward_steps(&t("a || b"), &s, 1)),
        vec![(vec!["a[1]".into(), "b[1]".into()], "a[1] || b[1]".into())]
    );
    assert_eq!(step_strings(&forward_steps(&t("a | b"), &s, 1)), vec![(vec!["c[1]".into()], "c[1]".into())]);
    let bare = Signature::from_names(&["a", "b"]);
    assert!(forward_steps(&parse_term("a | b", &bare).unwrap(), &bare, 1).is_empty());
    assert!(forward_steps(&t("delta"), &s, 1).is_empty());
    // the untaken branch stays as a ghost so the step can be undone
    assert_eq!(
        step_strings(&forward_steps(&t("a + b"), &s, 1)),
        vec![(vec!["a[1]".into()], "a[1] + b".into()), (vec!["b[1]".into()], "a + b[1]".into())]
    );
}

#[test]
fn reverse_moves() {
    let s = sig();
    assert_eq!(step_strings(&reverse_steps(&t("a[1]"), &s)), vec![(vec!["a[1]".into()], "a".into())]);
    assert_eq!(step_strings(&reverse_steps(&t("a[1] . b[2]"), &s)), vec![(vec!["b[2]".into()], "a[1] . b".into())]);
    assert_eq!(
        step_strings(&reverse_steps(&t("a[1] || b[1]"), &s)),
        vec![(vec!["a[1]".into(), "b[1]".into()], "a || b".into())]
    );
}

#[test]
fn small_state_spaces() {
    let l = build_lts(&t("a . b"), &sig(), Budget::default()).unwrap();
    let states: BTreeSet<String> = l.states.iter().map(render).collect();
    assert_eq!(states, ["a . b", "a[1] . b", "a[1] . b[2]"].iter().map(|s| s.to_string()).collect());
    assert_eq!(l.edges.iter().filter(|e| e.dir == Dir::Fwd).count(), 2);
    assert_eq!(l.edges.iter().filter(|e| e.dir == Dir::Rev).count(), 2);
    let i = l.initial;
    let m = moves(&l, i);
    assert_eq!(m.len(), 1);
    assert_eq!(m[0].1, vec!["a".to_string()]);
    let l = build_lts(&t("a + b"), &sig(), Budget::default()).unwrap();
    assert_eq!(l.len(), 3);
    let l = build_lts(&t("delta"), &sig(), Budget::default()).unwrap();
    assert_eq!((l.len(), l.edges.len()), (1, 0));
}

#[test]
fn unbounded_history_hits_the_key_limit() {
    let e = parse_spec_named("E", "X = a . X", &sig()).unwrap();
    let specs = BTreeMap::from([("E".to_string(), e.clone())]);
    let o = LtsOptions::new(Budget { max_states: 1000, max_key: 3 });
    assert_eq!(build_lts_with(&e.reference("X"), &sig(), &specs, &o), Err(SemanticsError::KeyLimitExceeded(3)));
}

#[test]
fn weak_edges_skip_silent_steps() {
    let mut o = LtsOptions::new(Budget::default());
    o.normalize = false;
    let g = build_lts_with(&t("tau . b . tau"), &sig(), &BTreeMap::new(), &o).unwrap();
    let fwd: Vec<_> = weak_closure(&g).into_iter().filter(|w| w.dir == Dir::Fwd && w.from == g.initial).collect();
    let done = g.states.iter().position(|s| render(s) == "tau[1] . b[2] . tau[3]").unwrap();
    assert!(fwd.iter().any(|w| w.to == done && w.labels == vec![l("b")]));
    assert!(fwd.iter().all(|w| w.labels == vec![l("b")]));
    let plain = build_lts(&t("a . b"), &sig(), Budget::default()).unwrap();
    assert_eq!(weak_closure(&plain).len(), plain.edges.len());
}

// equivalence

fn eq(a: &str, b: &str, k: EquivKind) -> bool {
    let (l1, l2) =
        (build_lts(&t(a), &sig(), Budget::default()).unwrap(), build_lts(&t(b), &sig(), Budget::default()).unwrap());
    check(&l1, &l2, k).unwrap().equivalent
}

#[test]
fn equivalence_examples() {
    assert!(eq("a + a", "a", EquivKind::FrStep));
    assert!(!eq("a || b", "a . b + b . a", EquivKind::FrStep));
    assert!(eq("a . tau", "a", EquivKind::RbFrStep));
    assert!(!eq("a . tau", "a", EquivKind::FrStep));
    assert!(!eq("a . (b + c)", "a . b + a . c", EquivKind::FrHp));
    assert!(eq("a || b", "b || a", EquivKind::FrHp));
    assert!(eq("a || b", "b || a", EquivKind::FrHhp));
}

#[test]
fn oracle_agrees_on_examples() {
    for (a, b) in [("a || b", "a . b + b . a"), ("a + a", "a"), ("a . (b + c)", "a . b + a . c"), ("a . b", "a . c")] {
        let (l1, l2) = (
            build_lts(&t(a), &sig(), Budget::default()).unwrap(),
            build_lts(&t(b), &sig(), Budget::default()).unwrap(),
        );
        assert_eq!(check(&l1, &l2, EquivKind::FrStep).unwrap().equivalent, naive_step_equiv(&l1, &l2), "{a} vs {b}");
    }
}

#[test]
fn distinguishing_play_is_reported() {
    let (l1, l2) = (
        build_lts(&t("a . b"), &sig(), Budget::default()).unwrap(),
        build_lts(&t("a . c"), &sig(), Budget::default()).unwrap(),
    );
    let v = check(&l1, &l2, EquivKind::FrStep).unwrap();
    assert!(!v.equivalent);
    let play = v.play.unwrap();
    assert!(!play.is_empty());
    assert!(v.witness.is_none());
}

#[test]
fn pomset_fragments() {
    let l = build_lts(&t("a . b"), &sig(), Budget::default()).unwrap();
    let end = l.states.iter().position(|s| render(s) == "a[1] . b[2]").unwrap();
    let m = pomset_moves(&l, l.initial, 2);
    assert!(m.iter().any(|p| p.target == end && p.pomset.labels.len() == 2 && p.pomset.order == vec![(0, 1)]));
    let l = build_lts(&t("a || b"), &sig(), Budget::default()).unwrap();
    let m = pomset_moves(&l, l.initial, 2);
    assert!(m.iter().any(|p| p.dir == Dir::Fwd && p.pomset.labels.len() == 2 && p.pomset.order.is_empty()));
    let l = build_lts(&t("a . b + c"), &sig(), Budget::default()).unwrap();
    for s in 0..l.len() {
        let single: BTreeSet<_> = pomset_moves(&l, s, 1).into_iter().map(|p| (p.dir, p.target)).collect();
        let steps: BTreeSet<_> = l.edges.iter().filter(|e| e.from == s).map(|e| (e.dir, e.to)).collect();
        assert_eq!(single, steps);
    }
}

#[test]
fn history_preserving_checks() {
    let l = build_lts(&t("a . (b || c) + a"), &sig(), Budget::default()).unwrap();
    assert!(hp_game(&l, &l, false).unwrap().equivalent);
    assert!(hhp_check(&l, &l).unwrap().equivalent);
    let (x, y) = (
        build_lts(&t("a . b"), &sig(), Budget::default()).unwrap(),
        build_lts(&t("a . c"), &sig(), Budget::default()).unwrap(),
    );
    assert!(!hhp_check(&x, &y).unwrap().equivalent);
}

// recursion and abstraction

#[test]
fn spec_classification() {
    let c = validate_spec(&parse_spec("X = a . X + b", &sig()).unwrap(), &sig());
    assert!(c.guarded && c.linear);
    assert_eq!(c.direction, Direction::Forward);
    assert!(!validate_spec(&parse_spec("X = X + a", &sig()).unwrap(), &sig()).guarded);
    let silent = parse_spec("X = tau . X", &sig()).unwrap();
    assert!(!validate_spec_in(&silent, Setting::Silent).guarded);
    assert!(validate_spec_in(&silent, Setting::TauFree).guarded);
}

#[test]
fn rdp_unfolding() {
    let e = parse_spec_named("E", "X = a . X + b", &sig()).unwrap();
    let body = unfold_rdp(&e, "X").unwrap();
    assert_eq!(
        body,
        canonicalize(&Term::Choice(vec![Term::Seq(vec![Term::ev("a"), e.reference("X")]), Term::ev("b")]))
    );
    let e = parse_spec_named("E", "X = a . Y; Y = b . X", &sig()).unwrap();
    assert_eq!(unfold_rdp(&e, "X").unwrap(), Term::Seq(vec![Term::ev("a"), e.reference("Y")]));
    assert_eq!(unfold_rdp(&e, "Z"), Err(RecError::UnknownVariable("Z".into())));
}

#[test]
fn comparing_specs() {
    let e1 = parse_spec_named("E", "X = a . X", &sig()).unwrap();
    let e2 = parse_spec_named("F", "Y = a . Z; Z = a . Y", &sig()).unwrap();
    assert!(spec_equal(&e1, "X", &e2, "Y", &sig(), EquivKind::FrStep, 6).unwrap().equivalent());
    let e3 = parse_spec_named("G", "X = a . X + b", &sig()).unwrap();
    let e4 = parse_spec_named("H", "Y = a . Y", &sig()).unwrap();
    assert!(!spec_equal(&e3, "X", &e4, "Y", &sig(), EquivKind::FrStep, 6).unwrap().equivalent());
    assert!(spec_equal(&e3, "X", &e3, "X", &sig(), EquivKind::FrStep, 6).unwrap().equivalent());
}

fn equations(e: &rapt::recursion::RecSpec) -> Vec<(String, String)> {
    e.equations.iter().map(|(v, b)| (v.clone(), render(b))).collect()
}

#[test]
fn linearization() {
    let (e, x) = linearize(&t("a . b"), &sig()).unwrap();
    assert_eq!(x, "X1");
    assert_eq!(equations(&e), vec![("X1".into(), "a . <X2|L>".into()), ("X2".into(), "b".into())]);
    let (e, _) = linearize(&t("(a || b) . c"), &sig()).unwrap();
    assert_eq!(equations(&e), vec![("X1".into(), "(a || b) . <X2|L>".into()), ("X2".into(), "c".into())]);
    let (e, _) = linearize(&t("a + b"), &sig()).unwrap();
    assert_eq!(equations(&e), vec![("X1".into(), "a + b".into())]);
}

#[test]
fn clusters() {
    let i = labels(&["a"]);
    let e = parse_spec_named("E", "X = a . X + b", &sig()).unwrap();
    let cs = find_clusters(&e, &i).unwrap();
    assert_eq!(cs.len(), 1);
    assert_eq!(cs[0].vars, vec!["X".to_string()]);
    assert_eq!(cs[0].exits, vec![Term::ev("b")]);
    let e = parse_spec_named("E", "X = a . Y; Y = a . X + b", &sig()).unwrap();
    let cs = find_clusters(&e, &i).unwrap();
    assert_eq!(cs.len(), 1);
    assert_eq!(cs[0].vars, vec!["X".to_string(), "Y".to_string()]);
    assert_eq!(cs[0].exits, vec![Term::ev("b")]);
    let e = parse_spec_named("E", "X = a . Y + c; Y = b . X", &sig()).unwrap();
    let cs = find_clusters(&e, &BTreeSet::new()).unwrap();
    assert_eq!(cs.len(), 2);
    assert_eq!(cs.iter().map(|c| c.exits.len()).sum::<usize>(), 3);
}

#[test]
fn cluster_fair_abstraction() {
    let i = labels(&["a"]);
    let e = parse_spec_named("E", "X = a . X + b", &sig()).unwrap();
    let r = apply_cfar(&e, "X", &i, &sig()).unwrap();
    assert_eq!(render(&r.result), "tau . b");
    assert!(r.verified && !r.divergent);
    let e = parse_spec_named("E", "X = a . X", &sig()).unwrap();
    let r = apply_cfar(&e, "X", &i, &sig()).unwrap();
    assert!(r.divergent);
    assert_eq!(render(&r.result), "tau . delta");
    let e = parse_spec_named("E", "X = a . X + b . c", &sig()).unwrap();
    assert_eq!(apply_cfar(&e, "X", &i, &sig()).unwrap_err(), RecError::NotLinear);
}
