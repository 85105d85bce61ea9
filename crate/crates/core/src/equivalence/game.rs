//! Finite bisimulation games solved as greatest fixpoints with removal ranks.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use serde::Serialize;

use crate::semantics::Dir;

use super::EquivError;

/// One move in a distinguishing play.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlayMove {
    /// `attacker` or `defender`.
    pub role: &'static str,
    /// LTS the move is made in (1 or 2).
    pub side: u8,
    pub dir: Dir,
    pub label: String,
    pub from: usize,
    pub to: usize,
}

pub(crate) struct Response<P> {
    pub moves: Vec<PlayMove>,
    pub required: Vec<P>,
}

pub(crate) struct Attack<P> {
    pub mv: PlayMove,
    pub responses: Vec<Response<P>>,
}

/// Defender moves paired with the positions they require.
type Answer = (Vec<PlayMove>, Vec<usize>);

struct Node {
    attacks: Vec<(PlayMove, Vec<Answer>)>,
}

pub(crate) struct Solved<P> {
    pub positions: Vec<P>,
    /// `None` while alive, `Some(r)` if removed in round `r`.
    rank: Vec<Option<usize>>,
    nodes: Vec<Node>,
}

/// Builds the game graph from `start` and solves it.
pub(crate) fn solve<P, F>(start: P, cap: usize, mut expand: F) -> Result<Solved<P>, EquivError>
where
    P: Clone + Eq + Hash,
    F: FnMut(&P) -> Vec<Attack<P>>,
{
    let mut positions = vec![start.clone()];
    let mut index: HashMap<P, usize> = HashMap::from([(start, 0)]);
    let mut nodes: Vec<Node> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let attacks = expand(&positions[i]);
        let mut node = Node { attacks: Vec::with_capacity(attacks.len()) };
        for a in attacks {
            let mut rs = Vec::with_capacity(a.responses.len());
            for r in a.responses {
                let mut ids = Vec::with_capacity(r.required.len());
                for p in r.required {
                    let id = match index.get(&p) {
                        Some(&id) => id,
                        None => {
                            if positions.len() >= cap {
                                return Err(EquivError::BudgetExceeded(format!("more than {cap} game positions")));
                            }
                            positions.push(p.clone());
                            index.insert(p, positions.len() - 1);
                            queue.push_back(positions.len() - 1);
                            positions.len() - 1
                        }
                    };
                    ids.push(id);
                }
                rs.push((r.moves, ids));
            }
            node.attacks.push((a.mv, rs));
        }
        if nodes.len() <= i {
            nodes.resize_with(i + 1, || Node { attacks: vec![] });
        }
        nodes[i] = node;
    }
    nodes.resize_with(positions.len(), || Node { attacks: vec![] });
    let mut rank: Vec<Option<usize>> = vec![None; positions.len()];
    let mut round = 0;
    loop {
        round += 1;
        let alive = |id: usize, rank: &[Option<usize>]| rank[id].is_none();
        let mut dead = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            if rank[i].is_some() {
                continue;
            }
            let lost = n.attacks.iter().any(|(_, rs)| !rs.iter().any(|(_, req)| req.iter().all(|&p| alive(p, &rank))));
            if lost {
                dead.push(i);
            }
        }
        if dead.is_empty() {
            break;
        }
        for i in dead {
            rank[i] = Some(round);
        }
    }
    Ok(Solved { positions, rank, nodes })
}

impl<P: Clone> Solved<P> {
    pub fn won(&self) -> bool {
        self.rank[0].is_none()
    }

    /// Positions in the greatest fixpoint.
    pub fn relation(&self) -> Vec<P> {
        self.positions.iter().zip(&self.rank).filter(|(_, r)| r.is_none()).map(|(p, _)| p.clone()).collect()
    }

    /// Attacker strategy from the start position, following removal ranks.
    pub fn play(&self) -> Vec<PlayMove> {
        let mut out = Vec::new();
        let mut cur = 0usize;
        while let Some(r) = self.rank[cur] {
            let dead_before = |p: usize| matches!(self.rank[p], Some(q) if q < r);
            let Some((mv, rs)) = self.nodes[cur]
                .attacks
                .iter()
                .find(|(_, rs)| rs.iter().all(|(_, req)| req.iter().any(|&p| dead_before(p))))
            else {
                break;
            };
            out.push(mv.clone());
            let Some((moves, req)) = rs.first() else { break };
            out.extend(moves.iter().cloned());
            let next = req
                .iter()
                .copied()
                .filter(|&p| dead_before(p))
                .min_by_key(|&p| self.rank[p])
                .expect("a required position died earlier");
            cur = next;
        }
        out
    }
}
