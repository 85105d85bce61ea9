//! Seeded random terms, contexts and recursive specifications.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::recursion::RecSpec;
use crate::semantics::{done, forward_steps};
use crate::term::{Label, Signature, Term};

/// Relative weights of the constructors drawn by [`TermGen`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Weights {
    pub event: u32,
    pub tau: u32,
    pub delta: u32,
    pub choice: u32,
    pub seq: u32,
    pub par: u32,
    pub between: u32,
    pub comm: u32,
    pub theta: u32,
    pub unless: u32,
    pub encap: u32,
    pub hide: u32,
}

impl Weights {
    /// Sums, sequences and parallel blocks only.
    pub fn basic() -> Weights {
        Weights {
            event: 6,
            tau: 0,
            delta: 1,
            choice: 3,
            seq: 3,
            par: 2,
            between: 0,
            comm: 0,
            theta: 0,
            unless: 0,
            encap: 0,
            hide: 0,
        }
    }

    /// Every operator the rewriter eliminates, on top of [`Weights::basic`].
    pub fn eliminable() -> Weights {
        Weights { between: 2, comm: 1, theta: 1, unless: 1, encap: 1, hide: 1, ..Weights::basic() }
    }

    pub fn with_tau(self, w: u32) -> Weights {
        Weights { tau: w, ..self }
    }
}

#[derive(Clone, Debug)]
pub struct TermGen {
    pub labels: Vec<Label>,
    pub weights: Weights,
}

#[derive(Clone, Copy)]
enum Pick {
    Event,
    Tau,
    Delta,
    Choice,
    Seq,
    Par,
    Between,
    Comm,
    Theta,
    Unless,
    Encap,
    Hide,
}

impl TermGen {
    pub fn new(labels: &[&str], weights: Weights) -> TermGen {
        let labels = labels.iter().map(|l| Label::new(l).expect("valid label")).collect();
        TermGen { labels, weights }
    }

    pub fn label<R: Rng>(&self, rng: &mut R) -> Label {
        self.labels.choose(rng).expect("nonempty alphabet").clone()
    }

    pub fn event<R: Rng>(&self, rng: &mut R) -> Term {
        Term::Event(crate::term::EventInstance::std(self.label(rng)))
    }

    pub fn history<R: Rng>(&self, rng: &mut R, max_key: u32) -> Term {
        Term::Event(crate::term::EventInstance::keyed(self.label(rng), rng.gen_range(1..=max_key)))
    }

    pub fn label_set<R: Rng>(&self, rng: &mut R) -> BTreeSet<Label> {
        let mut s: BTreeSet<Label> = self.labels.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        if s.is_empty() {
            s.insert(self.label(rng));
        }
        s
    }

    fn pick<R: Rng>(&self, rng: &mut R, leaf: bool) -> Pick {
        let w = self.weights;
        let table = [
            (Pick::Event, w.event),
            (Pick::Tau, w.tau),
            (Pick::Delta, w.delta),
            (Pick::Choice, w.choice),
            (Pick::Seq, w.seq),
            (Pick::Par, w.par),
            (Pick::Between, w.between),
            (Pick::Comm, w.comm),
            (Pick::Theta, w.theta),
            (Pick::Unless, w.unless),
            (Pick::Encap, w.encap),
            (Pick::Hide, w.hide),
        ];
        let cands: Vec<(Pick, u32)> = table
            .into_iter()
            .filter(|(p, wt)| *wt > 0 && (!leaf || matches!(p, Pick::Event | Pick::Tau | Pick::Delta)))
            .collect();
        let total: u32 = cands.iter().map(|(_, w)| w).sum();
        let mut r = rng.gen_range(0..total);
        for (p, wt) in &cands {
            if r < *wt {
                return *p;
            }
            r -= wt;
        }
        unreachable!("weights sum to total")
    }

    /// Closed term without histories, at most `depth` levels deep.
    pub fn term<R: Rng>(&self, rng: &mut R, depth: usize) -> Term {
        let leaf = depth <= 1;
        let sub = |rng: &mut R| self.term(rng, depth - 1);
        match self.pick(rng, leaf) {
            Pick::Event => self.event(rng),
            Pick::Tau => Term::tau(),
            Pick::Delta => Term::Delta,
            Pick::Choice => Term::Choice(vec![sub(rng), sub(rng)]),
            Pick::Seq => Term::Seq(vec![sub(rng), sub(rng)]),
            Pick::Par => Term::Par(vec![sub(rng), sub(rng)]),
            Pick::Between => Term::between(sub(rng), sub(rng)),
            Pick::Comm => Term::comm(sub(rng), sub(rng)),
            Pick::Theta => Term::theta(sub(rng)),
            Pick::Unless => Term::unless(sub(rng), sub(rng)),
            Pick::Encap => Term::encap(self.label_set(rng), sub(rng)),
            Pick::Hide => Term::hide(self.label_set(rng), sub(rng)),
        }
    }

    /// Term of at most `max_size` nodes, by rejection.
    pub fn sized<R: Rng>(&self, rng: &mut R, depth: usize, max_size: usize) -> Term {
        loop {
            let t = self.term(rng, depth);
            if t.size() <= max_size {
                return t;
            }
        }
    }

    /// State reached from a fresh term by up to `steps` random forward moves.
    pub fn state<R: Rng>(&self, rng: &mut R, depth: usize, steps: usize, sig: &Signature) -> Term {
        let mut t = self.term(rng, depth);
        let n = rng.gen_range(0..=steps);
        for _ in 0..n {
            let next = forward_steps(&t, sig, t.max_key() + 1);
            match next.choose(rng) {
                Some(s) => t = s.target.clone(),
                None => break,
            }
        }
        t
    }

    /// Fully executed term: a sum-free, deadlock-free term run to completion
    /// along a random path. `None` if keys would exceed `max_key`.
    pub fn executed<R: Rng>(&self, rng: &mut R, depth: usize, max_key: u32, sig: &Signature) -> Option<Term> {
        let g = TermGen {
            labels: self.labels.clone(),
            weights: Weights {
                delta: 0,
                choice: 0,
                between: 0,
                comm: 0,
                theta: 0,
                unless: 0,
                encap: 0,
                hide: 0,
                ..self.weights
            },
        };
        let mut t = g.term(rng, depth);
        while !done(&t) {
            let k = t.max_key() + 1;
            if k > max_key {
                return None;
            }
            let next = forward_steps(&t, sig, k);
            t = next.choose(rng)?.target.clone();
        }
        Some(t)
    }

    /// One-hole context of at most `depth` frames built from +, ., ||, enc
    /// and, when `hide` is set, abstraction.
    pub fn context<R: Rng>(&self, rng: &mut R, depth: usize, hide: bool) -> Context {
        let plain = TermGen { labels: self.labels.clone(), weights: Weights::basic() };
        let n = rng.gen_range(1..=depth.max(1));
        let frames = (0..n)
            .map(|_| {
                let other = plain.term(rng, 2);
                match rng.gen_range(0..if hide { 8 } else { 7 }) {
                    0 => Frame::ChoiceL(other),
                    1 => Frame::ChoiceR(other),
                    2 => Frame::SeqL(other),
                    3 => Frame::SeqR(other),
                    4 => Frame::ParL(other),
                    5 => Frame::ParR(other),
                    6 => Frame::Encap(self.label_set(rng)),
                    _ => Frame::Hide(self.label_set(rng)),
                }
            })
            .collect();
        Context { frames }
    }

    fn block<R: Rng>(&self, rng: &mut R, labels: &[Label]) -> Term {
        let ev =
            |rng: &mut R| Term::Event(crate::term::EventInstance::std(labels.choose(rng).expect("labels").clone()));
        if rng.gen_bool(0.25) {
            Term::Par(vec![ev(rng), ev(rng)])
        } else {
            ev(rng)
        }
    }

    /// Guarded linear forward specification named `name` with `vars` variables.
    pub fn linear_spec<R: Rng>(&self, rng: &mut R, name: &str, vars: usize) -> RecSpec {
        let names: Vec<String> = (1..=vars).map(|i| format!("X{i}")).collect();
        let equations = names
            .iter()
            .map(|v| {
                let n = rng.gen_range(1..=3);
                let summands: Vec<Term> = (0..n)
                    .map(|_| {
                        let b = self.block(rng, &self.labels);
                        if rng.gen_bool(0.7) {
                            let y = names.choose(rng).expect("vars").clone();
                            Term::Seq(vec![b, Term::RecRef(y, name.to_string())])
                        } else {
                            b
                        }
                    })
                    .collect();
                (v.clone(), crate::term::canonicalize(&Term::Choice(summands)))
            })
            .collect();
        RecSpec::new(name, equations)
    }

    /// Linear spec whose variables form one cycle of actions from `internal`,
    /// with at least one exit using the other labels.
    pub fn cluster_spec<R: Rng>(&self, rng: &mut R, name: &str, vars: usize, internal: &BTreeSet<Label>) -> RecSpec {
        let inner: Vec<Label> = internal.iter().cloned().collect();
        let outer: Vec<Label> = self.labels.iter().filter(|l| !internal.contains(l)).cloned().collect();
        let names: Vec<String> = (1..=vars).map(|i| format!("X{i}")).collect();
        let exit_var = format!("X{}", vars + 1);
        let r = |v: &str| Term::RecRef(v.to_string(), name.to_string());
        let with_exit = rng.gen_range(0..vars);
        let mut equations = Vec::new();
        for (i, v) in names.iter().enumerate() {
            let mut summands = vec![Term::Seq(vec![self.block(rng, &inner), r(&names[(i + 1) % vars])])];
            if rng.gen_bool(0.3) {
                let back = names.choose(rng).expect("vars");
                summands.push(Term::Seq(vec![self.block(rng, &inner), r(back)]));
            }
            if i == with_exit || rng.gen_bool(0.3) {
                let b = self.block(rng, &outer);
                summands.push(if rng.gen_bool(0.5) { b } else { Term::Seq(vec![b, r(&exit_var)]) });
            }
            equations.push((v.clone(), crate::term::canonicalize(&Term::Choice(summands))));
        }
        equations.push((exit_var, self.block(rng, &outer)));
        RecSpec::new(name, equations)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    /// `[] + t`
    ChoiceL(Term),
    /// `t + []`
    ChoiceR(Term),
    /// `[] . t`
    SeqL(Term),
    /// `t . []`
    SeqR(Term),
    ParL(Term),
    ParR(Term),
    Encap(BTreeSet<Label>),
    Hide(BTreeSet<Label>),
}

/// One-hole context; frames are applied innermost first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub frames: Vec<Frame>,
}

impl Context {
    pub fn plug(&self, t: &Term) -> Term {
        self.frames.iter().fold(t.clone(), |acc, f| match f {
            Frame::ChoiceL(o) => Term::Choice(vec![acc, o.clone()]),
            Frame::ChoiceR(o) => Term::Choice(vec![o.clone(), acc]),
            Frame::SeqL(o) => Term::Seq(vec![acc, o.clone()]),
            Frame::SeqR(o) => Term::Seq(vec![o.clone(), acc]),
            Frame::ParL(o) => Term::Par(vec![acc, o.clone()]),
            Frame::ParR(o) => Term::Par(vec![o.clone(), acc]),
            Frame::Encap(h) => Term::encap(h.clone(), acc),
            Frame::Hide(i) => Term::hide(i.clone(), acc),
        })
    }
}
