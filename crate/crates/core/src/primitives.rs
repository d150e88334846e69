//! Building-block sub-protocols. Each charges its messages to the session's
//! ledger and draws public coins from its tape.

use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use thiserror::Error;

use crate::comm::ledger::{ceil_log2, floor_log2};
use crate::comm::{Mode, Payload, Session};
use crate::graph::{Edge, Vertex};

#[derive(Debug, Error, PartialEq)]
pub enum PrimitiveError {
    #[error("no player holds an edge at vertex {0}")]
    NoEdge(Vertex),
    #[error("no player holds any edge")]
    EmptyInput,
    #[error("the inputs are not promised to be disjoint")]
    DuplicationPresent,
    #[error("approximation factor must exceed 1, got {0}")]
    Alpha(f64),
    #[error("error probability must lie in (0, 1), got {0}")]
    Tau(f64),
}

/// Each player says whether it holds `e`; the coordinator announces the OR.
pub fn query_edge(session: &mut Session<'_>, e: Edge) -> bool {
    session.all_send_up(Payload::Bit, 1, "query-edge");
    session.broadcast(Payload::Bit, "query-edge");
    session.parts().iter().any(|p| p.holds(e))
}

/// Uniform edge among the distinct edges at `v`, whatever the duplication.
/// A public order ranks the potential neighbors; every player reports its
/// first neighbor in that order and the coordinator keeps the global first.
pub fn sample_adjacent_edge(session: &mut Session<'_>, v: Vertex) -> Option<Edge> {
    let coins = session.tape().keyed();
    let mut best: Option<((u64, u64), Vertex)> = None;
    for j in 0..session.k() {
        let local = session.part(j).neighbors(v).iter().map(|&u| (coins.rank(u64::from(u)), u)).min();
        match local {
            Some(cand) => {
                session.send_up(j, Payload::Vertex, "adjacent-edge");
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
            None => {
                session.send_up(j, Payload::Empty, "adjacent-edge");
            }
        }
    }
    best.map(|(_, u)| Edge::new(v, u))
}

/// Uniform edge among the distinct edges of the graph.
pub fn sample_uniform_edge(session: &mut Session<'_>) -> Option<Edge> {
    let coins = session.tape().keyed();
    let n = session.n() as u64;
    let key = |e: &Edge| u64::from(e.lo()) * n + u64::from(e.hi());
    let mut best: Option<((u64, u64), Edge)> = None;
    for j in 0..session.k() {
        let local = session.part(j).edges().iter().map(|e| (coins.rank(key(e)), *e)).min();
        match local {
            Some(cand) => {
                session.send_up(j, Payload::Edge, "uniform-edge");
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
            None => {
                session.send_up(j, Payload::Empty, "uniform-edge");
            }
        }
    }
    if best.is_some() {
        session.broadcast(Payload::Edge, "uniform-edge");
    }
    best.map(|(_, e)| e)
}

/// Walk of at most `steps` moves from `start`, each to a uniform neighbor.
/// Stops early at a vertex with no edges.
pub fn random_walk(session: &mut Session<'_>, start: Vertex, steps: usize) -> Vec<Vertex> {
    let mut path = vec![start];
    let mut at = start;
    for _ in 0..steps {
        session.next_round();
        match sample_adjacent_edge(session, at) {
            Some(e) => {
                at = e.other(at);
                path.push(at);
            }
            None => break,
        }
    }
    path
}

/// All edges with both endpoints in `vertices`. On a blackboard each edge is
/// posted once; in coordinator mode every holder sends its copy.
pub fn collect_induced_subgraph(session: &mut Session<'_>, vertices: &[Vertex]) -> Vec<Edge> {
    let mut inside = vec![false; session.n()];
    for &v in vertices {
        inside[v as usize] = true;
    }
    let mut collected: Vec<Edge> = Vec::new();
    let blackboard = session.mode() == Mode::Blackboard;
    for j in 0..session.k() {
        let mut mine: Vec<Edge> = session
            .part(j)
            .edges()
            .iter()
            .filter(|e| inside[e.lo() as usize] && inside[e.hi() as usize])
            .copied()
            .collect();
        if blackboard {
            collected.sort_unstable();
            mine.retain(|e| collected.binary_search(e).is_err());
        }
        session.send_up(j, Payload::EdgeList(mine.len()), "induced-subgraph");
        collected.extend(mine);
    }
    collected.sort_unstable();
    collected.dedup();
    collected
}

/// Outcome of a degree (or distinct-count) estimation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegreeEstimate {
    pub value: f64,
    pub alpha: f64,
    /// `1 - tau`, or 1 for the deterministic estimator.
    pub confidence: f64,
    /// Phase-1 bound `d'`, with `d'/(2k) <= true value <= d'`.
    pub phase1_bound: f64,
}

/// `beta_1(alpha) = (1 - 1/e) / (1 - e^(-1/alpha)) - 1`: the relative gap
/// between the hit rates of a correct guess and an `alpha`-fold overestimate.
pub fn beta1(alpha: f64) -> f64 {
    (1.0 - (-1.0f64).exp()) / (1.0 - (-1.0 / alpha).exp()) - 1.0
}

/// Experiments per ladder round for failure probability `tau` over `rounds`.
pub fn experiments_per_round(alpha: f64, tau: f64, rounds: usize) -> u64 {
    let b = beta1(alpha);
    ((48.0 / (b * b)) * (2.0 * rounds.max(1) as f64 / tau).ln()).ceil() as u64
}

/// Guesses `d'/(alpha^(1/2))^r` down to `max(2, d'/(2k))`.
pub fn guess_ladder(d_prime: f64, k: usize, alpha: f64) -> Vec<f64> {
    let floor = (d_prime / (2.0 * k as f64)).max(2.0);
    let step = alpha.sqrt();
    let mut out = Vec::new();
    let mut g = d_prime;
    while g >= floor * (1.0 - 1e-12) {
        out.push(g);
        g /= step;
    }
    if out.is_empty() {
        out.push(d_prime);
    }
    out
}

fn check_params(alpha: f64, tau: f64) -> Result<(), PrimitiveError> {
    if !(alpha > 1.0) {
        return Err(PrimitiveError::Alpha(alpha));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(PrimitiveError::Tau(tau));
    }
    Ok(())
}

/// Phase 2 of the estimator: walk the guess ladder, and at each guess `g`
/// run experiments in which a public set keeps each element of the universe
/// with probability `1/g` and every player reports whether it holds a kept
/// element. The first guess whose hit rate reaches the threshold wins.
///
/// The coordinator only needs the number of experiments whose OR is 1,
/// which is `Binomial(m, 1 - (1 - 1/g)^D)` for `D` distinct held elements;
/// the simulator draws that count directly and charges every player's bits.
fn ladder_search(session: &mut Session<'_>, d_prime: f64, distinct: usize, alpha: f64, tau: f64, tag: &str) -> f64 {
    let ladder = guess_ladder(d_prime, session.k(), alpha);
    let rounds = ladder.len() - 1;
    if rounds == 0 {
        return ladder[0];
    }
    let m = experiments_per_round(alpha, tau, rounds);
    let shrink = (1.0 + beta1(alpha)).sqrt();
    for (r, &g) in ladder[..rounds].iter().enumerate() {
        session.next_round();
        let hit = 1.0 - (1.0 - 1.0 / g).powf(distinct as f64);
        let full = 1.0 - (1.0 - 1.0 / g).powf(g);
        let threshold = full / shrink;
        let mut rng = session.tape().step();
        let successes = Binomial::new(m, hit.clamp(0.0, 1.0)).expect("valid binomial").sample(&mut rng);
        let round_tag = format!("{tag}-phase2-round-{r}");
        session.all_send_up(Payload::Bit, m, &round_tag);
        session.broadcast(Payload::Bit, &round_tag);
        if successes as f64 >= threshold * m as f64 {
            return g;
        }
    }
    ladder[rounds]
}

fn msb_sum(session: &mut Session<'_>, counts: &[usize], payload: Payload, tag: &str) -> f64 {
    session.next_round();
    let mut d_prime = 0.0;
    for (j, &c) in counts.iter().enumerate() {
        session.send_up(j, payload, tag);
        if c > 0 {
            d_prime += 2f64.powi(floor_log2(c as u64) as i32 + 1);
        }
    }
    d_prime
}

fn distinct_neighbors(session: &Session<'_>, v: Vertex) -> usize {
    let mut all: Vec<Vertex> = session.parts().iter().flat_map(|p| p.neighbors(v).iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// `alpha`-approximation of `deg(v)` with probability at least `1 - tau`,
/// robust to duplicated edges. Phase 1 sums the players' most significant
/// bits; Phase 2 refines by distinct-element sampling.
pub fn approx_degree(session: &mut Session<'_>, v: Vertex, alpha: f64, tau: f64) -> Result<DegreeEstimate, PrimitiveError> {
    check_params(alpha, tau)?;
    let local: Vec<usize> = session.parts().iter().map(|p| p.degree(v)).collect();
    let d_prime = msb_sum(session, &local, Payload::MsbIndex, "degree-phase1");
    if d_prime == 0.0 {
        return Err(PrimitiveError::NoEdge(v));
    }
    let distinct = distinct_neighbors(session, v);
    let value = ladder_search(session, d_prime, distinct, alpha, tau, "degree");
    let value = value.clamp(d_prime / (2.0 * session.k() as f64), d_prime);
    Ok(DegreeEstimate { value, alpha, confidence: 1.0 - tau, phase1_bound: d_prime })
}

/// The same estimator applied to the whole edge set: an `alpha`-approximation
/// of the number of distinct edges.
pub fn approx_edge_count(session: &mut Session<'_>, alpha: f64, tau: f64) -> Result<DegreeEstimate, PrimitiveError> {
    check_params(alpha, tau)?;
    let local: Vec<usize> = session.parts().iter().map(|p| p.edges().len()).collect();
    // MSB index of a count below n^2
    let n = session.n() as u64;
    let width = u64::from(ceil_log2(1 + u64::from(ceil_log2(n.saturating_mul(n))))).max(1);
    let d_prime = msb_sum(session, &local, Payload::Raw(width), "edges-phase1");
    if d_prime == 0.0 {
        return Err(PrimitiveError::EmptyInput);
    }
    let mut all: Vec<Edge> = session.parts().iter().flat_map(|p| p.edges().iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    let value = ladder_search(session, d_prime, all.len(), alpha, tau, "edges");
    let value = value.clamp(d_prime / (2.0 * session.k() as f64), d_prime);
    Ok(DegreeEstimate { value, alpha, confidence: 1.0 - tau, phase1_bound: d_prime })
}

/// Number of most significant bits each player keeps so that truncation
/// loses at most a factor `alpha`.
pub fn nodup_kept_bits(alpha: f64) -> u32 {
    let need = (1.0 / (alpha - 1.0)).log2().ceil();
    1 + need.max(0.0) as u32
}

/// `x` with all but its `bits` most significant bits cleared.
pub fn truncate_msb(x: u64, bits: u32) -> u64 {
    if x == 0 {
        return 0;
    }
    let top = floor_log2(x);
    if top < bits {
        return x;
    }
    let drop = top + 1 - bits;
    (x >> drop) << drop
}

/// Deterministic degree estimate for disjoint inputs: each player sends the
/// top bits of its local degree and the position of the cutoff. Never
/// over-counts, and under-counts by at most `alpha`.
pub fn approx_degree_nodup(session: &mut Session<'_>, v: Vertex, alpha: f64) -> Result<DegreeEstimate, PrimitiveError> {
    if !session.no_duplication() {
        return Err(PrimitiveError::DuplicationPresent);
    }
    if !(alpha > 1.0) {
        return Err(PrimitiveError::Alpha(alpha));
    }
    let bits = nodup_kept_bits(alpha);
    session.next_round();
    let mut value = 0u64;
    for j in 0..session.k() {
        let d = session.part(j).degree(v) as u64;
        session.send_up(j, Payload::MsbIndex, "degree-nodup");
        session.send_up(j, Payload::Raw(u64::from(bits)), "degree-nodup");
        value += truncate_msb(d, bits);
    }
    if value == 0 {
        return Err(PrimitiveError::NoEdge(v));
    }
    let value = value as f64;
    Ok(DegreeEstimate { value, alpha, confidence: 1.0, phase1_bound: value })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::comm::RandomTape;
    use crate::graph::{EdgePartition, Graph};

    fn star_partition(deg: u32, k: usize, dup: bool) -> EdgePartition {
        let g = Arc::new(Graph::new(deg as usize + 1, (1..=deg).map(|i| (0, i))).unwrap());
        let mut parts = vec![Vec::new(); k];
        for (i, &e) in g.edges().iter().enumerate() {
            parts[i % k].push(e);
            if dup {
                parts[(i + 1) % k].push(e);
            }
        }
        EdgePartition::from_parts(g, parts).unwrap()
    }

    #[test]
    fn query_edge_costs_two_k() {
        let p = star_partition(6, 4, true);
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        assert!(query_edge(&mut s, Edge::new(0, 3)));
        assert!(!query_edge(&mut s, Edge::new(1, 3)));
        assert_eq!(s.ledger().total_bits(), 2 * (4 + 4));
    }

    #[test]
    fn adjacent_edge_trivial_cases() {
        let p = star_partition(1, 2, false);
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        assert_eq!(sample_adjacent_edge(&mut s, 1), Some(Edge::new(0, 1)));
        let g = Arc::new(Graph::new(3, [(0, 1)]).unwrap());
        let p = EdgePartition::new(g.clone(), vec![g.edges().to_vec()], true).unwrap();
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        assert_eq!(sample_adjacent_edge(&mut s, 2), None);
        assert_eq!(sample_uniform_edge(&mut s), Some(Edge::new(0, 1)));
    }

    #[test]
    fn walk_on_a_single_edge_alternates() {
        let g = Arc::new(Graph::new(2, [(0, 1)]).unwrap());
        let p = EdgePartition::new(g.clone(), vec![g.edges().to_vec()], true).unwrap();
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(9), false);
        assert_eq!(random_walk(&mut s, 0, 3), vec![0, 1, 0, 1]);
        assert_eq!(random_walk(&mut s, 0, 0), vec![0]);
    }

    #[test]
    fn induced_subgraph_modes() {
        let g = Arc::new(Graph::new(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap());
        let all = g.edges().to_vec();
        let p = EdgePartition::from_parts(g, vec![all.clone(), all.clone(), all[..2].to_vec()]).unwrap();
        let mut coord = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        let mut board = Session::new(&p, Mode::Blackboard, RandomTape::new(0), false);
        let a = collect_induced_subgraph(&mut coord, &[0, 1, 2]);
        let b = collect_induced_subgraph(&mut board, &[0, 1, 2]);
        assert_eq!(a, vec![Edge::new(0, 1), Edge::new(0, 2), Edge::new(1, 2)]);
        assert_eq!(a, b);
        assert!(board.ledger().total_bits() < coord.ledger().total_bits());
        assert!(collect_induced_subgraph(&mut coord, &[0, 3]).is_empty());
    }

    #[test]
    fn phase1_single_player() {
        let p = star_partition(5, 1, false);
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        let est = approx_degree(&mut s, 0, 2.0, 0.1).unwrap();
        assert_eq!(est.phase1_bound, 8.0);
        assert!(est.value >= 4.0 && est.value <= 8.0);
    }

    #[test]
    fn degree_one_is_phase1_only() {
        let p = star_partition(1, 1, false);
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        let est = approx_degree(&mut s, 1, 2.0, 0.1).unwrap();
        assert_eq!(est.phase1_bound, 2.0);
        assert_eq!(est.value, 2.0);
        assert_eq!(s.ledger().rounds(), 1);
    }

    #[test]
    fn degree_errors() {
        let g = Arc::new(Graph::new(3, [(0, 1)]).unwrap());
        let p = EdgePartition::new(g.clone(), vec![g.edges().to_vec(), g.edges().to_vec()], false).unwrap();
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        assert_eq!(approx_degree(&mut s, 2, 2.0, 0.1), Err(PrimitiveError::NoEdge(2)));
        assert_eq!(approx_degree(&mut s, 0, 1.0, 0.1), Err(PrimitiveError::Alpha(1.0)));
        assert_eq!(approx_degree(&mut s, 0, 2.0, 0.0), Err(PrimitiveError::Tau(0.0)));
        assert_eq!(approx_degree_nodup(&mut s, 0, 1.5), Err(PrimitiveError::DuplicationPresent));
    }

    #[test]
    fn msb_truncation() {
        assert_eq!(nodup_kept_bits(1.5), 2);
        assert_eq!(nodup_kept_bits(2.0), 1);
        assert_eq!(nodup_kept_bits(1.1), 5);
        assert_eq!(truncate_msb(0b1011, 2), 0b1000);
        assert_eq!(truncate_msb(0b1111, 3), 0b1110);
        assert_eq!(truncate_msb(3, 2), 3);
        assert_eq!(truncate_msb(0, 2), 0);
    }

    #[test]
    fn nodup_examples() {
        let p = star_partition(11, 1, false);
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        let est = approx_degree_nodup(&mut s, 0, 1.5).unwrap();
        assert_eq!(est.value, 8.0);
        assert!(est.value <= 11.0 && 11.0 <= 1.5 * est.value);

        // two players with 2^3 edges each are summed exactly
        let p = star_partition(16, 2, false);
        let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(0), false);
        assert_eq!(approx_degree_nodup(&mut s, 0, 1.5).unwrap().value, 16.0);
        // leaves hold one edge at one player each
        assert_eq!(approx_degree_nodup(&mut s, 3, 1.5).unwrap().value, 1.0);
    }

    #[test]
    fn ladder_shape() {
        let l = guess_ladder(64.0, 4, 3f64.sqrt());
        assert_eq!(l[0], 64.0);
        assert!(*l.last().unwrap() >= 8.0 - 1e-9);
        assert!(*l.last().unwrap() / 3f64.powf(0.25) < 8.0);
        for w in l.windows(2) {
            assert!((w[0] / w[1] - 3f64.powf(0.25)).abs() < 1e-9);
        }
        assert_eq!(guess_ladder(2.0, 1, 2.0), vec![2.0]);
    }

    #[test]
    fn beta_and_experiments() {
        // beta_1(sqrt 3) = 0.6321 / (1 - e^(-0.57735)) - 1
        let b = beta1(3f64.sqrt());
        assert!((b - 0.4412).abs() < 1e-3, "{b}");
        assert!(beta1(1.01) < beta1(2.0));
        let m = experiments_per_round(3f64.sqrt(), 0.05, 8);
        assert_eq!(m, ((48.0 / (b * b)) * (16.0f64 / 0.05).ln()).ceil() as u64);
    }

    #[test]
    fn edge_count_estimate() {
        let p = star_partition(40, 3, true);
        let mut hits = 0;
        for seed in 0..50 {
            let mut s = Session::new(&p, Mode::Coordinator, RandomTape::new(seed), false);
            let est = approx_edge_count(&mut s, 2.0, 0.05).unwrap();
            if est.value >= 20.0 && est.value <= 80.0 {
                hits += 1;
            }
        }
        assert!(hits >= 45, "{hits}");
    }
}
