//! Coupling (weight function) feasibility between two finitely-supported
//! distributions, restricted to an allowed relation. Decided by maximum flow
//! on the bipartite transportation graph, computed in exact rational
//! arithmetic so feasibility never depends on float rounding.

use num_traits::Zero;
use thiserror::Error;

use crate::ratio::Rat;

#[derive(Debug, Error, PartialEq)]
#[error("coupling requires equal total masses ({0} vs {1})")]
pub struct MassMismatch(pub String, pub String);

/// A witness coupling: positive weights on pairs of support points.
pub type Coupling = Vec<(usize, usize, Rat)>;

/// Searches for a coupling of `mu1` and `mu2` supported inside `allowed`.
/// Entries are `(probability, state)`; masses must agree exactly.
pub fn coupling_exists(
    mu1: &[(Rat, usize)],
    mu2: &[(Rat, usize)],
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Result<Option<Coupling>, MassMismatch> {
    let left: Vec<(Rat, usize)> = mu1.iter().filter(|(p, _)| !p.is_zero()).cloned().collect();
    let right: Vec<(Rat, usize)> = mu2.iter().filter(|(p, _)| !p.is_zero()).cloned().collect();
    let total_l: Rat = left.iter().map(|(p, _)| p.clone()).sum();
    let total_r: Rat = right.iter().map(|(p, _)| p.clone()).sum();
    if total_l != total_r {
        return Err(MassMismatch(
            crate::ratio::rat_to_string(&total_l),
            crate::ratio::rat_to_string(&total_r),
        ));
    }
    if total_l.is_zero() {
        return Ok(Some(Vec::new()));
    }

    // nodes: 0 = source, 1..=L lefts, L+1..=L+R rights, L+R+1 = sink
    let (nl, nr) = (left.len(), right.len());
    let n_nodes = nl + nr + 2;
    let sink = n_nodes - 1;
    let mut flow = MaxFlow::new(n_nodes);
    for (i, (p, _)) in left.iter().enumerate() {
        flow.add_edge(0, 1 + i, p.clone());
    }
    for (j, (p, _)) in right.iter().enumerate() {
        flow.add_edge(1 + nl + j, sink, p.clone());
    }
    for (i, (_, s)) in left.iter().enumerate() {
        for (j, (_, t)) in right.iter().enumerate() {
            if allowed(*s, *t) {
                flow.add_edge(1 + i, 1 + nl + j, total_l.clone());
            }
        }
    }
    let value = flow.run(0, sink);
    if value != total_l {
        return Ok(None);
    }
    let mut witness = Vec::new();
    for e in flow.edges.chunks(2) {
        let fwd = &e[0];
        if fwd.from >= 1 && fwd.from <= nl && fwd.to > nl && fwd.to <= nl + nr {
            let used = &e[1].cap; // residual of reverse edge = pushed flow
            if !used.is_zero() {
                witness.push((left[fwd.from - 1].1, right[fwd.to - 1 - nl].1, used.clone()));
            }
        }
    }
    Ok(Some(witness))
}

struct Edge {
    from: usize,
    to: usize,
    cap: Rat,
}

struct MaxFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl MaxFlow {
    fn new(n: usize) -> Self {
        MaxFlow { edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: Rat) {
        let id = self.edges.len();
        self.edges.push(Edge { from, to, cap });
        self.edges.push(Edge { from: to, to: from, cap: Rat::zero() });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
    }

    /// Edmonds-Karp: the number of augmentations is bounded by V*E
    /// independently of the capacities, so exact rationals are fine.
    fn run(&mut self, source: usize, sink: usize) -> Rat {
        let mut total = Rat::zero();
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(source);
            pred[source] = Some(usize::MAX);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &eid in &self.adj[u] {
                    let e = &self.edges[eid];
                    if pred[e.to].is_none() && !e.cap.is_zero() {
                        pred[e.to] = Some(eid);
                        queue.push_back(e.to);
                    }
                }
            }
            if pred[sink].is_none() {
                return total;
            }
            // bottleneck
            let mut bottleneck: Option<Rat> = None;
            let mut v = sink;
            while v != source {
                let eid = pred[v].unwrap();
                let cap = self.edges[eid].cap.clone();
                bottleneck = Some(match bottleneck {
                    None => cap,
                    Some(b) => b.min(cap),
                });
                v = self.edges[eid].from;
            }
            let push = bottleneck.unwrap();
            let mut v = sink;
            while v != source {
                let eid = pred[v].unwrap();
                self.edges[eid].cap -= push.clone();
                self.edges[eid ^ 1].cap += push.clone();
                v = self.edges[eid].from;
            }
            total += push;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat_frac, rat_from_int};
    use num_traits::One;

    #[test]
    fn point_masses_couple_on_identity() {
        let mu = vec![(Rat::one(), 7usize)];
        let nu = vec![(Rat::one(), 7usize)];
        let w = coupling_exists(&mu, &nu, &|a, b| a == b).unwrap().unwrap();
        assert_eq!(w, vec![(7, 7, Rat::one())]);
    }

    #[test]
    fn forced_split() {
        // mu1 = (1/2, 1/2) over {x, y}, mu2 = 1 over {z}
        let mu1 = vec![(rat_frac(1, 2), 0), (rat_frac(1, 2), 1)];
        let mu2 = vec![(Rat::one(), 2)];
        let w = coupling_exists(&mu1, &mu2, &|_, _| true).unwrap().unwrap();
        assert_eq!(w.len(), 2);
        for (_, t, p) in &w {
            assert_eq!(*t, 2);
            assert_eq!(*p, rat_frac(1, 2));
        }
    }

    #[test]
    fn missing_pair_blocks_the_flow() {
        let mu1 = vec![(rat_frac(1, 2), 0), (rat_frac(1, 2), 1)];
        let mu2 = vec![(rat_frac(1, 2), 2), (rat_frac(1, 2), 3)];
        // only (0, 2) allowed: flow value caps at 1/2
        let res = coupling_exists(&mu1, &mu2, &|a, b| a == 0 && b == 2).unwrap();
        assert!(res.is_none());
    }

    #[test]
    fn mass_mismatch_is_an_error() {
        let mu1 = vec![(rat_frac(1, 2), 0)];
        let mu2 = vec![(Rat::one(), 1)];
        assert!(coupling_exists(&mu1, &mu2, &|_, _| true).is_err());
    }

    #[test]
    fn marginals_of_witness() {
        let mu1 = vec![(rat_frac(1, 3), 0), (rat_frac(2, 3), 1)];
        let mu2 = vec![(rat_frac(1, 2), 2), (rat_frac(1, 2), 3)];
        let allowed = |a: usize, b: usize| !(a == 0 && b == 3);
        let w = coupling_exists(&mu1, &mu2, &allowed).unwrap().unwrap();
        let mass_left = |s: usize| -> Rat {
            w.iter().filter(|(a, _, _)| *a == s).map(|(_, _, p)| p.clone()).sum()
        };
        let mass_right = |t: usize| -> Rat {
            w.iter().filter(|(_, b, _)| *b == t).map(|(_, _, p)| p.clone()).sum()
        };
        assert_eq!(mass_left(0), rat_frac(1, 3));
        assert_eq!(mass_left(1), rat_frac(2, 3));
        assert_eq!(mass_right(2), rat_frac(1, 2));
        assert_eq!(mass_right(3), rat_frac(1, 2));
        assert_eq!(rat_from_int(0), w.iter().filter(|(a, b, _)| *a == 0 && *b == 3).map(|(_, _, p)| p.clone()).sum());
    }
}
