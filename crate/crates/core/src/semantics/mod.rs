//! Forward/reverse operational semantics and LTS construction.

mod lts;
mod sos;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::recursion::RecSpec;
use crate::rewriter::RewriteError;
use crate::term::{Signature, Term};

pub(crate) use lts::tau_reach;
pub use lts::{weak_closure, Dir, Edge, Lts, WeakEdge};
pub use sos::{done, Step};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("state limit {0} exceeded")]
    StateLimitExceeded(usize),
    #[error("key limit {0} exceeded")]
    KeyLimitExceeded(u32),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("unknown recursion variable {0}")]
    UnknownVariable(String),
    #[error("unknown specification {0}")]
    UnknownSpec(String),
    #[error("recursion reference stays unguarded after unfolding")]
    Unguarded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_states: usize,
    pub max_key: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_states: 10_000, max_key: 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LtsOptions {
    pub budget: Budget,
    /// Drop the two sequencing gap-fill rules.
    pub strict_paper_sos: bool,
    /// Stop at the key bound instead of failing; cut states become frontier states.
    pub truncate: bool,
    /// Normalize the initial term first.
    pub normalize: bool,
}

impl LtsOptions {
    pub fn new(budget: Budget) -> Self {
        LtsOptions { budget, strict_paper_sos: false, truncate: false, normalize: true }
    }
}

fn sos(sig: &Signature) -> sos::Sos<'_> {
    sos::Sos { sig, gap_fill: true }
}

/// All forward moves; every fired event gets `next_key`.
pub fn forward_steps(t: &Term, sig: &Signature, next_key: u32) -> Vec<Step> {
    sos(sig).fwd(t, next_key)
}

/// All reverse moves.
pub fn reverse_steps(t: &Term, sig: &Signature) -> Vec<Step> {
    sos(sig).rev(t)
}

/// Normalizes `t` and explores it in both directions.
pub fn build_lts(t: &Term, sig: &Signature, b: Budget) -> Result<Lts, SemanticsError> {
    lts::explore(t, sig, &BTreeMap::new(), &LtsOptions::new(b))
}

/// Like [`build_lts`], resolving recursion references against `specs`.
pub fn build_lts_with(
    t: &Term,
    sig: &Signature,
    specs: &BTreeMap<String, RecSpec>,
    opts: &LtsOptions,
) -> Result<Lts, SemanticsError> {
    lts::explore(t, sig, specs, opts)
}
