//! Pushback stage: receivers announce how many layers they want, and the
//! requests propagate toward the source under a chosen criterion.
//!
//! Receivers always request `min(minCut, L)`. An intermediate node combines
//! the requests of its children with its own min-cut:
//!
//! * min-req — forward the minimum nonzero child request;
//! * min-cut — forward the own min-cut when it exceeds that minimum (the
//!   node can then decode and act as a secondary source).
//!
//! Both schedules (one emission per node in reverse topological order, or
//! re-emission on every update until quiescence) reach the same fixed point
//! on a DAG; the flooding path exists to exercise exactly that.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::netgraph::{LayeredDag, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    MinReq,
    MinCut,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Criterion::MinReq => "minreq",
            Criterion::MinCut => "mincut",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    Flooding,
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Schedule::Sequential => "sequential",
            Schedule::Flooding => "flooding",
        })
    }
}

/// Outcome of the pushback stage: the request `q(v)` and min-cut of every
/// node. The source carries the sentinel values `q = 0`, `min_cut = 0`; its
/// entries are never consumed by the code assignment stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestState {
    pub q: Vec<u32>,
    pub min_cut: Vec<u32>,
}

#[derive(Debug, Error)]
pub enum PushbackError {
    #[error("flooding did not quiesce within {0} updates")]
    NonQuiescent(usize),
}

/// Minimum nonzero child request; 0 when every child requests 0 (or there
/// are no children). The node's own min-cut plays no role.
pub fn criterion_min_req(child_requests: &[u32], _min_cut_v: u32) -> u32 {
    child_requests
        .iter()
        .copied()
        .filter(|&q| q > 0)
        .min()
        .unwrap_or(0)
}

/// Like min-req, except the node claims its own min-cut when that exceeds
/// the minimum nonzero child request.
pub fn criterion_min_cut(child_requests: &[u32], min_cut_v: u32) -> u32 {
    let q_min = criterion_min_req(child_requests, min_cut_v);
    if q_min == 0 {
        0
    } else if min_cut_v <= q_min {
        q_min
    } else {
        min_cut_v
    }
}

fn apply(criterion: Criterion, child_requests: &[u32], min_cut_v: u32) -> u32 {
    match criterion {
        Criterion::MinReq => criterion_min_req(child_requests, min_cut_v),
        Criterion::MinCut => criterion_min_cut(child_requests, min_cut_v),
    }
}

/// Run the pushback stage. Every request is capped at the layer count, so
/// `0 <= q(v) <= L` holds even on hand-built graphs whose min-cuts exceed
/// the number of layers.
pub fn run_pushback(
    g: &LayeredDag,
    criterion: Criterion,
    schedule: Schedule,
) -> Result<RequestState, PushbackError> {
    let min_cut = g.min_cuts_from_source();
    let q = match schedule {
        Schedule::Sequential => sequential(g, criterion, &min_cut),
        Schedule::Flooding => flooding(g, criterion, &min_cut, None)?,
    };
    Ok(RequestState { q, min_cut })
}

/// Flooding with a seeded, randomized processing order. Converges to the
/// same fixed point as any other order; used to test the convergence claim.
pub fn run_pushback_randomized(
    g: &LayeredDag,
    criterion: Criterion,
    rng: &mut impl Rng,
) -> Result<RequestState, PushbackError> {
    let min_cut = g.min_cuts_from_source();
    let q = flooding(g, criterion, &min_cut, Some(rng))?;
    Ok(RequestState { q, min_cut })
}

fn node_request(
    g: &LayeredDag,
    criterion: Criterion,
    min_cut: &[u32],
    q: &[u32],
    v: NodeId,
) -> u32 {
    if g.is_receiver(v) {
        // A receiver participates purely as a receiver here, even when it
        // has children of its own.
        return min_cut[v].min(g.layers());
    }
    if v == g.source() {
        return 0;
    }
    let child_requests: Vec<u32> = g.children(v).iter().map(|&c| q[c]).collect();
    apply(criterion, &child_requests, min_cut[v]).min(g.layers())
}

fn sequential(g: &LayeredDag, criterion: Criterion, min_cut: &[u32]) -> Vec<u32> {
    let mut q = vec![0u32; g.node_count()];
    for &v in g.topo_order().iter().rev() {
        q[v] = node_request(g, criterion, min_cut, &q, v);
    }
    q
}

/// Work-queue fixed point: nodes re-emit whenever a child's request changed.
/// Nodes that request 0 still announce the 0, so parents can tell "no
/// demand" apart from "not yet reported".
fn flooding(
    g: &LayeredDag,
    criterion: Criterion,
    min_cut: &[u32],
    order_rng: Option<&mut dyn rand::RngCore>,
) -> Result<Vec<u32>, PushbackError> {
    let n = g.node_count();
    let mut q = vec![0u32; n];
    for &r in g.receivers() {
        q[r] = min_cut[r].min(g.layers());
    }

    let mut initial: Vec<NodeId> = (0..n).collect();
    if let Some(rng) = order_rng {
        initial.shuffle(rng);
    }
    let mut queued = vec![false; n];
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for v in initial {
        if v != g.source() && !g.is_receiver(v) {
            queued[v] = true;
            queue.push_back(v);
        }
    }

    let budget = (n + 1) * (n + 1) * (g.layers() as usize + 2);
    let mut updates = 0usize;
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        updates += 1;
        if updates > budget {
            return Err(PushbackError::NonQuiescent(budget));
        }
        let next = node_request(g, criterion, min_cut, &q, v);
        if next != q[v] {
            q[v] = next;
            for p in g.parents(v) {
                if p != g.source() && !g.is_receiver(p) && !queued[p] {
                    queued[p] = true;
                    queue.push_back(p);
                }
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::netgraph::GenParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Three receivers with min-cuts (2, 3, 1) behind three relays. Built so
    /// that the two criteria disagree on the relays exactly as described in
    /// the module docs: min-req yields relay requests (2, 1, 1), min-cut
    /// yields (2, 2, 2).
    pub(crate) fn three_receiver_fixture() -> LayeredDag {
        // 0 = source, 1..=3 relays, 4..=6 receivers.
        LayeredDag::new(
            3,
            7,
            0,
            vec![4, 5, 6],
            vec![
                (0, 1),
                (0, 1),
                (0, 2),
                (0, 2),
                (0, 3),
                (2, 3),
                (1, 4),
                (1, 4),
                (1, 5),
                (2, 5),
                (3, 5),
                (3, 6),
            ],
        )
        .unwrap()
    }

    #[test]
    fn min_req_examples() {
        assert_eq!(criterion_min_req(&[2, 3], 7), 2);
        assert_eq!(criterion_min_req(&[0, 0], 1), 0);
        assert_eq!(criterion_min_req(&[0, 3, 1], 0), 1);
        assert_eq!(criterion_min_req(&[], 5), 0);
    }

    #[test]
    fn min_cut_examples() {
        assert_eq!(criterion_min_cut(&[1], 2), 2);
        assert_eq!(criterion_min_cut(&[2], 2), 2);
        assert_eq!(criterion_min_cut(&[3], 1), 3);
        assert_eq!(criterion_min_cut(&[0, 0], 4), 0);
    }

    #[test]
    fn fixture_min_cuts() {
        let g = three_receiver_fixture();
        let cuts = g.min_cuts_from_source();
        assert_eq!(cuts[4], 2);
        assert_eq!(cuts[5], 3);
        assert_eq!(cuts[6], 1);
        assert_eq!(cuts[1], 2);
        assert_eq!(cuts[2], 2);
        assert_eq!(cuts[3], 2);
    }

    #[test]
    fn relay_requests_under_min_req() {
        let g = three_receiver_fixture();
        let st = run_pushback(&g, Criterion::MinReq, Schedule::Sequential).unwrap();
        assert_eq!(st.q[4], 2);
        assert_eq!(st.q[5], 3);
        assert_eq!(st.q[6], 1);
        assert_eq!(st.q[1], 2);
        assert_eq!(st.q[2], 1);
        assert_eq!(st.q[3], 1);
    }

    #[test]
    fn relay_requests_under_min_cut() {
        let g = three_receiver_fixture();
        let st = run_pushback(&g, Criterion::MinCut, Schedule::Sequential).unwrap();
        // Relay 3 claims its min-cut of 2; relay 2 then sees requests {2, 3}
        // and forwards the minimum.
        assert_eq!(st.q[1], 2);
        assert_eq!(st.q[2], 2);
        assert_eq!(st.q[3], 2);
    }

    #[test]
    fn single_chain_requests_one_under_both_criteria() {
        let g = LayeredDag::new(2, 3, 0, vec![2], vec![(0, 1), (1, 2)]).unwrap();
        for criterion in [Criterion::MinReq, Criterion::MinCut] {
            let st = run_pushback(&g, criterion, Schedule::Sequential).unwrap();
            assert_eq!(st.q[2], 1);
            assert_eq!(st.q[1], 1);
        }
    }

    #[test]
    fn receiver_requests_are_capped_at_layer_count() {
        // Receiver min-cut 3 but only 2 layers exist.
        let g = LayeredDag::new(2, 2, 0, vec![1], vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let st = run_pushback(&g, Criterion::MinCut, Schedule::Sequential).unwrap();
        assert_eq!(st.min_cut[1], 3);
        assert_eq!(st.q[1], 2);
    }

    #[test]
    fn intermediate_requests_are_capped_at_layer_count() {
        // Relay 1 has min-cut 3 while its child requests 1; under min-cut it
        // would claim 3, but the cap holds it at L = 2.
        let g = LayeredDag::new(2, 3, 0, vec![2], vec![(0, 1), (0, 1), (0, 1), (1, 2)]).unwrap();
        let st = run_pushback(&g, Criterion::MinCut, Schedule::Sequential).unwrap();
        assert_eq!(st.q[2], 1);
        assert_eq!(st.q[1], 2);
    }

    #[test]
    fn childless_intermediates_and_source_request_zero() {
        // Node 2 is a childless intermediate.
        let g = LayeredDag::new(2, 4, 0, vec![3], vec![(0, 1), (1, 3), (0, 2)]).unwrap();
        let st = run_pushback(&g, Criterion::MinCut, Schedule::Sequential).unwrap();
        assert_eq!(st.q[2], 0);
        assert_eq!(st.q[0], 0);
    }

    #[test]
    fn flooding_equals_sequential_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let g = LayeredDag::generate_random(GenParams::new(25, 5, 3), &mut rng).unwrap();
            for criterion in [Criterion::MinReq, Criterion::MinCut] {
                let seq = run_pushback(&g, criterion, Schedule::Sequential).unwrap();
                let flood = run_pushback(&g, criterion, Schedule::Flooding).unwrap();
                assert_eq!(seq, flood);
            }
        }
    }

    #[test]
    fn randomized_update_orders_converge_to_the_same_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let g = LayeredDag::generate_random(GenParams::new(20, 4, 2), &mut rng).unwrap();
            let reference = run_pushback(&g, Criterion::MinCut, Schedule::Sequential).unwrap();
            for _ in 0..5 {
                let shuffled = run_pushback_randomized(&g, Criterion::MinCut, &mut rng).unwrap();
                assert_eq!(reference, shuffled);
            }
        }
    }

    #[test]
    fn request_invariants_hold_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let g = LayeredDag::generate_random(GenParams::new(30, 6, 3), &mut rng).unwrap();
            for criterion in [Criterion::MinReq, Criterion::MinCut] {
                let st = run_pushback(&g, criterion, Schedule::Sequential).unwrap();
                for v in 0..g.node_count() {
                    assert!(st.q[v] <= g.layers());
                    if g.is_receiver(v) {
                        assert_eq!(st.q[v], st.min_cut[v].min(g.layers()));
                        continue;
                    }
                    if v == g.source() {
                        continue;
                    }
                    let child_reqs: Vec<u32> = g.children(v).iter().map(|&c| st.q[c]).collect();
                    let q_min = criterion_min_req(&child_reqs, st.min_cut[v]);
                    match criterion {
                        Criterion::MinReq => assert_eq!(st.q[v], q_min.min(g.layers())),
                        Criterion::MinCut => {
                            assert!(st.q[v] <= st.min_cut[v].max(q_min).min(g.layers()));
                            if q_min > 0 {
                                assert!(st.q[v] >= q_min.min(g.layers()));
                            }
                        }
                    }
                }
            }
        }
    }
}
