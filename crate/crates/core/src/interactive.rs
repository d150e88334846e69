//! The interactive triangle finder: sample suspected members of a degree
//! bucket, estimate their degrees, sample their edges and ask the players
//! for a closing edge.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::bucket::{bucket_count, is_local_candidate, lower_degree, upper_degree, DegreeThresholds};
use crate::comm::{Mode, Payload, Protocol, ProtocolKind, Session, Verdict};
use crate::graph::{Edge, Triangle, Vertex};
use crate::params::{check_epsilon_delta, check_positive, log2n, ParamError};
use crate::primitives::{approx_degree, approx_edge_count};

/// Approximation factor of the per-candidate degree estimates.
pub const CANDIDATE_ALPHA: f64 = 1.732_050_807_568_877_2;

/// User-facing knobs of the interactive protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractiveParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Average degree, when known to all parties.
    pub d_known: Option<f64>,
}

/// Parameters derived for a concrete `n` and `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractiveConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub d_known: Option<f64>,
    /// Stop collecting once this many distinct candidates are kept.
    pub n_candidates: u64,
    /// Samples drawn from a bucket's suspects.
    pub q_samples: u64,
    /// Failure probability of each degree estimate.
    pub approx_error_per_call: f64,
}

impl InteractiveConfig {
    pub fn new(params: InteractiveParams, n: usize, k: usize) -> Result<Self, ParamError> {
        let InteractiveParams { epsilon, delta, d_known } = params;
        check_epsilon_delta(epsilon, delta)?;
        if let Some(d) = d_known {
            check_positive("average degree", d)?;
        }
        let l = (6.0 / delta).ln();
        let log_sq = log2n(n).powi(2);
        let n_candidates = (l * 312.0 * log_sq / (epsilon * epsilon)).ceil().max(1.0) as u64;
        let q_samples = (l * 108.0 * log_sq * k as f64 / (epsilon * epsilon)).ceil().max(1.0) as u64;
        Ok(InteractiveConfig {
            epsilon,
            delta,
            d_known,
            n_candidates,
            q_samples,
            approx_error_per_call: delta / (3.0 * q_samples as f64),
        })
    }

    /// Edge sampling probability for a vertex of estimated degree `d`.
    pub fn edge_probability(&self, n: usize, d_estimate: f64) -> f64 {
        let l = (6.0 / self.delta).ln();
        let p = 4.0 * l.sqrt() * (12.0 * log2n(n) / (self.epsilon * (d_estimate / 3.0))).sqrt();
        p.min(1.0)
    }

    /// Largest sample a player forwards for that vertex.
    pub fn edge_cap(&self, n: usize, d_estimate: f64) -> f64 {
        let l = (6.0 / self.delta).ln();
        let dp = d_estimate * self.edge_probability(n, d_estimate);
        (1.0 + 18.0 / dp * l) * CANDIDATE_ALPHA * dp
    }
}

/// Coordinator state that survives across buckets.
struct Memo {
    degree: Vec<Option<f64>>,
}

impl Memo {
    fn new(n: usize) -> Self {
        Memo { degree: vec![None; n] }
    }
}

/// Per-player suspect lists `B~_i^j` and their union, computed locally.
struct Suspects {
    union: Vec<Vertex>,
    /// Which players have a nonempty list; fixes the cost of one draw.
    nonempty: Vec<bool>,
}

fn suspects(session: &Session<'_>, i: usize) -> Suspects {
    let (n, k) = (session.n(), session.k());
    let mut in_union = vec![false; n];
    let mut nonempty = vec![false; k];
    for (j, part) in session.parts().iter().enumerate() {
        for v in 0..n as Vertex {
            if is_local_candidate(part.degree(v), i, k) {
                in_union[v as usize] = true;
                nonempty[j] = true;
            }
        }
    }
    let union: Vec<Vertex> = (0..n as Vertex).filter(|&v| in_union[v as usize]).collect();
    Suspects { union, nonempty }
}

/// One draw of the suspect sampler: under a public random order on `V` each
/// player names its first suspect and the coordinator keeps the global
/// first, which is uniform over `B~_i` regardless of how many players
/// suspect each vertex.
pub fn sample_uniform_from_btilde(session: &mut Session<'_>, i: usize) -> Option<Vertex> {
    let coins = session.tape().keyed();
    let (n, k) = (session.n(), session.k());
    let mut best: Option<((u64, u64), Vertex)> = None;
    for j in 0..k {
        let part = session.part(j);
        let local = (0..n as Vertex)
            .filter(|&v| is_local_candidate(part.degree(v), i, k))
            .map(|v| (coins.rank(u64::from(v)), v))
            .min();
        match local {
            Some(c) => {
                session.send_up(j, Payload::Vertex, "alg1-sample");
                if best.is_none_or(|b| c < b) {
                    best = Some(c);
                }
            }
            None => {
                session.send_up(j, Payload::Empty, "alg1-sample");
            }
        }
    }
    best.map(|(_, v)| v)
}

fn sample_tag_charge(session: &mut Session<'_>, s: &Suspects, count: u64) {
    if count == 0 {
        return;
    }
    for (j, &ne) in s.nonempty.iter().enumerate() {
        let payload = if ne { Payload::Vertex } else { Payload::Empty };
        session.send_up_repeated(j, payload, count, "alg1-sample");
    }
}

/// Whether a degree estimate is consistent with membership in `B_i`.
pub fn passes_filter(d_estimate: f64, i: usize) -> bool {
    d_estimate >= lower_degree(i) / CANDIDATE_ALPHA && d_estimate <= CANDIDATE_ALPHA * upper_degree(i)
}

/// Samples suspects of bucket `i` and estimates their degrees, handing each
/// new candidate to `visit` as soon as it is kept. Stops early when `visit`
/// returns a triangle.
///
/// Repeated draws of an already examined vertex carry no new information to
/// the coordinator, so runs of repeats are drawn as one geometric count and
/// charged at the fixed per-draw cost.
fn scan_bucket(
    session: &mut Session<'_>,
    i: usize,
    cfg: &InteractiveConfig,
    memo: &mut Memo,
    mut visit: impl FnMut(&mut Session<'_>, Vertex, f64) -> Option<Triangle>,
) -> Option<Triangle> {
    let s = suspects(session, i);
    if s.union.is_empty() {
        sample_tag_charge(session, &s, 1);
        return None;
    }
    let mut unseen = s.union.clone();
    let mut kept = 0u64;
    let mut count = 0u64;
    while count < cfg.q_samples && kept < cfg.n_candidates {
        let mut rng = session.tape().step();
        let remaining = cfg.q_samples - count;
        if unseen.is_empty() {
            sample_tag_charge(session, &s, remaining);
            break;
        }
        let p_new = unseen.len() as f64 / s.union.len() as f64;
        let repeats = if p_new >= 1.0 { 0 } else { Geometric::new(p_new).expect("valid p").sample(&mut rng) };
        if repeats >= remaining {
            sample_tag_charge(session, &s, remaining);
            break;
        }
        sample_tag_charge(session, &s, repeats + 1);
        count += repeats + 1;
        let v = unseen.swap_remove(rng.random_range(0..unseen.len()));
        session.next_round();
        let d = match memo.degree[v as usize] {
            Some(d) => d,
            None => {
                let est = approx_degree(session, v, CANDIDATE_ALPHA, cfg.approx_error_per_call)
                    .expect("suspects hold an edge")
                    .value;
                memo.degree[v as usize] = Some(est);
                est
            }
        };
        if passes_filter(d, i) {
            kept += 1;
            if let Some(t) = visit(session, v, d) {
                return Some(t);
            }
        }
    }
    None
}

/// Candidates of bucket `i` with their degree estimates.
pub fn get_full_candidates(session: &mut Session<'_>, i: usize, cfg: &InteractiveConfig) -> Vec<(Vertex, f64)> {
    let mut memo = Memo::new(session.n());
    let mut out = Vec::new();
    scan_bucket(session, i, cfg, &mut memo, |_, v, d| {
        out.push((v, d));
        None
    });
    out
}

/// Public sample of the potential edges at `v`, each kept with the sampling
/// probability; players forward their kept edges unless over the cap, in
/// which case they send a one-bit refusal.
pub fn sample_edges(session: &mut Session<'_>, v: Vertex, d_estimate: f64, cfg: &InteractiveConfig) -> Vec<Edge> {
    let n = session.n();
    let p = cfg.edge_probability(n, d_estimate);
    let cap = cfg.edge_cap(n, d_estimate);
    let coins = session.tape().keyed();
    let threshold = if p >= 1.0 { u64::MAX } else { (p * u64::MAX as f64) as u64 };
    let blackboard = session.mode() == Mode::Blackboard;
    session.next_round();
    let mut collected: Vec<Vertex> = Vec::new();
    for j in 0..session.k() {
        let mut mine: Vec<Vertex> =
            session.part(j).neighbors(v).iter().copied().filter(|&u| coins.value(u64::from(u)) <= threshold).collect();
        let over = mine.len() as f64 > cap;
        session.stats_mut().record_cap(over);
        if over {
            session.send_up(j, Payload::Empty, "alg4-edges");
            continue;
        }
        if blackboard {
            collected.sort_unstable();
            mine.retain(|u| collected.binary_search(u).is_err());
        }
        session.send_up(j, Payload::EdgeList(mine.len()), "alg4-edges");
        collected.extend(mine);
    }
    collected.sort_unstable();
    collected.dedup();
    collected.into_iter().map(|u| Edge::new(v, u)).collect()
}

/// First edge of player `j` closing a vee of `sample` (all sourced at `v`).
fn closing_edge(session: &Session<'_>, j: usize, sample_nbrs: &[Vertex]) -> Option<Edge> {
    let part = session.part(j);
    for &u in sample_nbrs {
        for &w in part.neighbors(u) {
            if w > u && sample_nbrs.binary_search(&w).is_ok() {
                return Some(Edge::new(u, w));
            }
        }
    }
    None
}

/// Broadcasts the sampled edges at `v` and asks every player for a closer.
fn ask_for_closer(session: &mut Session<'_>, v: Vertex, sample: &[Edge]) -> Option<Triangle> {
    if sample.len() < 2 {
        return None;
    }
    let nbrs: Vec<Vertex> = sample.iter().map(|e| e.other(v)).collect();
    session.next_round();
    if session.mode() != Mode::Blackboard {
        session.broadcast(Payload::EdgeList(sample.len()), "alg5-broadcast");
    }
    let mut found = None;
    for j in 0..session.k() {
        let closer = closing_edge(session, j, &nbrs);
        session.send_up(j, if closer.is_some() { Payload::Edge } else { Payload::Empty }, "alg5-broadcast");
        if found.is_none() {
            found = closer;
        }
        if found.is_some() && session.mode() == Mode::Blackboard {
            break;
        }
    }
    found.map(|c| Triangle::new(v, c.lo(), c.hi()))
}

fn find_triangle_vee_with(session: &mut Session<'_>, i: usize, cfg: &InteractiveConfig, memo: &mut Memo) -> Option<Triangle> {
    scan_bucket(session, i, cfg, memo, |s, v, d| {
        let sample = sample_edges(s, v, d, cfg);
        ask_for_closer(s, v, &sample)
    })
}

/// Looks for a triangle through the candidates of bucket `i`.
pub fn find_triangle_vee(session: &mut Session<'_>, i: usize, cfg: &InteractiveConfig) -> Option<Triangle> {
    let mut memo = Memo::new(session.n());
    find_triangle_vee_with(session, i, cfg, &mut memo)
}

/// Buckets the protocol scans when the degree window is `[lo, hi]`: every
/// bucket whose lower degree bound lies in the window.
pub fn buckets_to_scan(n: usize, lo: f64, hi: f64) -> Vec<usize> {
    (1..bucket_count(n)).filter(|&i| lower_degree(i) >= lo && lower_degree(i) <= hi).collect()
}

/// Buckets scanned with a known average degree; every bucket when the
/// window is empty at this scale.
pub fn known_degree_buckets(n: usize, d: f64, epsilon: f64) -> Vec<usize> {
    match DegreeThresholds::from_average_degree(n, d, epsilon) {
        Ok(t) => buckets_to_scan(n, t.d_l, t.d_h),
        Err(_) => (1..bucket_count(n)).collect(),
    }
}

/// The interactive protocol, for the coordinator and blackboard models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FindTriangle {
    pub params: InteractiveParams,
}

impl FindTriangle {
    pub fn new(epsilon: f64, delta: f64, d_known: Option<f64>) -> Self {
        FindTriangle { params: InteractiveParams { epsilon, delta, d_known } }
    }
}

impl Protocol for FindTriangle {
    fn name(&self) -> String {
        match self.params.d_known {
            Some(_) => "find_triangle".into(),
            None => "find_triangle_oblivious".into(),
        }
    }

    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Interactive
    }

    fn supports(&self, mode: Mode) -> bool {
        matches!(mode, Mode::Coordinator | Mode::Blackboard)
    }

    fn execute(&self, session: &mut Session<'_>) -> Verdict {
        let (n, k) = (session.n(), session.k());
        let cfg = InteractiveConfig::new(self.params, n, k).expect("invalid interactive parameters");
        let buckets = match cfg.d_known {
            Some(d) => known_degree_buckets(n, d, cfg.epsilon),
            None => {
                let Ok(m) = approx_edge_count(session, 2.0, cfg.delta / 4.0) else {
                    return Verdict::NoTriangleFound;
                };
                let d = 2.0 * m.value / n as f64;
                let d_l = cfg.epsilon * d / (2.0 * log2n(n));
                let d_h = (n as f64 * d / cfg.epsilon).sqrt();
                buckets_to_scan(n, d_l / 2.0, 2.0 * d_h)
            }
        };
        let mut memo = Memo::new(n);
        for i in buckets {
            session.next_round();
            if let Some(t) = find_triangle_vee_with(session, i, &cfg, &mut memo) {
                return Verdict::TriangleFound(t);
            }
        }
        Verdict::NoTriangleFound
    }
}
