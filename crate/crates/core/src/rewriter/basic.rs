use crate::term::Term;

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum BasicMode {
    Closed,
    /// Recursion references count as opaque items.
    Open,
}

/// True when `t` is built only from atoms, `+`, `.` and `||`-blocks.
pub fn is_basic(t: &Term) -> bool {
    is_basic_with(t, BasicMode::Closed)
}

pub(crate) fn is_basic_with(t: &Term, mode: BasicMode) -> bool {
    match t {
        Term::Choice(v) => v.iter().all(|s| summand(s, mode)),
        _ => summand(t, mode),
    }
}

fn summand(t: &Term, mode: BasicMode) -> bool {
    match t {
        Term::Seq(v) => v.iter().all(|i| item(i, mode)),
        _ => item(t, mode),
    }
}

fn item(t: &Term, mode: BasicMode) -> bool {
    match t {
        Term::Choice(v) => v.iter().all(|s| summand(s, mode)),
        Term::RecRef(..) => mode == BasicMode::Open,
        _ => is_block(t),
    }
}

/// An atom, or a `||` of events and τ sharing one key discipline.
pub(crate) fn is_block(t: &Term) -> bool {
    match t {
        Term::Event(_) | Term::Delta | Term::Tau(_) => true,
        Term::Par(v) => {
            let mut keys = std::collections::BTreeSet::new();
            for c in v {
                match c {
                    Term::Event(e) => keys.insert(e.key),
                    Term::Tau(k) => keys.insert(*k),
                    _ => return false,
                };
            }
            keys.len() == 1
        }
        _ => false,
    }
}
