//! Seeded instance generators and partition strategies.

use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgePartition, Graph, GraphError, PlayerId, Vertex};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("gamma must lie in (0, 1), got {0}")]
    Gamma(f64),
    #[error("each side needs at least 3 vertices, got {0}")]
    SideTooSmall(usize),
    #[error("need at least one triangle")]
    NoTriangles,
    #[error("{0}")]
    MalformedMatching(String),
    #[error("expected {expected} bits in {what}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("average degree {d} is not achievable by a bipartite graph on {n} vertices")]
    Density { n: usize, d: f64 },
    #[error("{needed} vertices needed but only {n} available")]
    TooFewVertices { needed: usize, n: usize },
    #[error("a partition needs at least one player")]
    NoPlayers,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_labels(n: usize, rng: &mut impl Rng) -> Vec<Vertex> {
    let mut labels: Vec<Vertex> = (0..n as Vertex).collect();
    labels.shuffle(rng);
    labels
}

/// `t` vertex-disjoint triangles plus `pad` isolated vertices, under a
/// random labeling.
pub fn gen_disjoint_triangles(t: usize, pad: usize, seed: u64) -> Result<Graph, GenError> {
    if t == 0 {
        return Err(GenError::NoTriangles);
    }
    let n = 3 * t + pad;
    let label = random_labels(n, &mut rng(seed));
    let edges = (0..t)
        .flat_map(|i| {
            let [a, b, c] = [label[3 * i], label[3 * i + 1], label[3 * i + 2]];
            [Edge::new(a, b), Edge::new(b, c), Edge::new(a, c)]
        })
        .collect();
    Ok(Graph::from_edges(n, edges)?)
}

/// Random bipartite graph with exactly `round(n d / 2)` edges between two
/// random halves, hence triangle-free.
pub fn gen_bipartite_random(n: usize, d: f64, seed: u64) -> Result<Graph, GenError> {
    let target = (n as f64 * d / 2.0).round();
    let (left, right) = (n / 2, n - n / 2);
    let pairs = left * right;
    if !(d >= 0.0) || target > pairs as f64 {
        return Err(GenError::Density { n, d });
    }
    let mut rng = rng(seed);
    let label = random_labels(n, &mut rng);
    let edges = index::sample(&mut rng, pairs, target as usize)
        .into_iter()
        .map(|x| Edge::new(label[x / right], label[left + x % right]))
        .collect();
    Ok(Graph::from_edges(n, edges)?)
}

/// The tripartite random graph: sides `U = 0..s`, `V1 = s..2s`,
/// `V2 = 2s..3s`, each cross pair present with probability `gamma/sqrt(s)`.
pub fn gen_tripartite_mu(side_size: usize, gamma: f64, seed: u64) -> Result<Graph, GenError> {
    let [a, b, c] = tripartite_mu_parts(side_size, gamma, seed)?;
    let mut edges: Vec<Edge> = a.into_iter().chain(b).chain(c).collect();
    edges.sort_unstable();
    Ok(Graph::from_edges(3 * side_size, edges)?)
}

/// The same draw split three ways: `U x V1`, `U x V2`, `V1 x V2`.
pub fn tripartite_mu_parts(side_size: usize, gamma: f64, seed: u64) -> Result<[Vec<Edge>; 3], GenError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GenError::Gamma(gamma));
    }
    if side_size < 3 {
        return Err(GenError::SideTooSmall(side_size));
    }
    let s = side_size as Vertex;
    let p = gamma / (side_size as f64).sqrt();
    let mut rng = rng(seed);
    let mut draw = |x0: Vertex, y0: Vertex| -> Vec<Edge> {
        let mut out = Vec::new();
        for x in x0..x0 + s {
            for y in y0..y0 + s {
                if rng.random::<f64>() < p {
                    out.push(Edge::new(x, y));
                }
            }
        }
        out
    };
    let uv1 = draw(0, s);
    let uv2 = draw(0, 2 * s);
    let v1v2 = draw(s, 2 * s);
    Ok([uv1, uv2, v1v2])
}

/// A Boolean Hidden Matching instance as a graph, with each side's edges.
#[derive(Clone, Debug)]
pub struct BhmInstance {
    pub graph: Graph,
    pub alice: Vec<Edge>,
    pub bob: Vec<Edge>,
}

/// Vertex `(i, b)` of the gadget; vertex 0 is the hub `u`.
pub fn bhm_vertex(i: usize, b: bool) -> Vertex {
    (1 + 2 * i + usize::from(b)) as Vertex
}

/// Alice joins the hub to `(i, x_i)`. For the `j`-th matched pair Bob adds
/// two parallel edges between the copies when `w_j = 0` and two crossed
/// ones when `w_j = 1`, so pair `j` closes a triangle iff
/// `x_a + x_b + w_j = 0 (mod 2)`.
pub fn gen_bhm_reduction(x: &[bool], matching: &[(usize, usize)], w: &[bool]) -> Result<BhmInstance, GenError> {
    let m = matching.len();
    if x.len() != 2 * m {
        return Err(GenError::Length { what: "x", expected: 2 * m, got: x.len() });
    }
    if w.len() != m {
        return Err(GenError::Length { what: "w", expected: m, got: w.len() });
    }
    let mut covered = vec![false; 2 * m];
    for &(a, b) in matching {
        for v in [a, b] {
            if v >= 2 * m {
                return Err(GenError::MalformedMatching(format!("element {v} out of range 0..{}", 2 * m)));
            }
            if covered[v] {
                return Err(GenError::MalformedMatching(format!("element {v} matched twice")));
            }
            covered[v] = true;
        }
    }
    let alice: Vec<Edge> = (0..2 * m).map(|i| Edge::new(0, bhm_vertex(i, x[i]))).collect();
    let mut bob = Vec::with_capacity(2 * m);
    for (&(a, b), &wj) in matching.iter().zip(w) {
        bob.push(Edge::new(bhm_vertex(a, false), bhm_vertex(b, wj)));
        bob.push(Edge::new(bhm_vertex(a, true), bhm_vertex(b, !wj)));
    }
    let mut edges: Vec<Edge> = alice.iter().chain(&bob).copied().collect();
    edges.sort_unstable();
    let graph = Graph::from_edges(1 + 4 * m, edges)?;
    Ok(BhmInstance { graph, alice, bob })
}

/// `Mx + w` over GF(2).
pub fn bhm_parity(x: &[bool], matching: &[(usize, usize)], w: &[bool]) -> Vec<bool> {
    matching.iter().zip(w).map(|(&(a, b), &wj)| x[a] ^ x[b] ^ wj).collect()
}

/// Random gadget with `Mx + w` equal to the all-`value` vector.
pub fn gen_bhm_homogeneous(m: usize, value: bool, seed: u64) -> Result<BhmInstance, GenError> {
    let mut rng = rng(seed);
    let x: Vec<bool> = (0..2 * m).map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..2 * m).collect();
    order.shuffle(&mut rng);
    let matching: Vec<(usize, usize)> = order.chunks(2).map(|c| (c[0], c[1])).collect();
    let w: Vec<bool> = matching.iter().map(|&(a, b)| x[a] ^ x[b] ^ value).collect();
    gen_bhm_reduction(&x, &matching, &w)
}

/// `dense` plus isolated vertices up to `n_total`.
pub fn embed_sparse(dense: &Graph, n_total: usize) -> Result<Graph, GenError> {
    if n_total < dense.n() {
        return Err(GenError::TooFewVertices { needed: dense.n(), n: n_total });
    }
    Ok(Graph::from_edges(n_total, dense.edges().to_vec())?)
}

/// Complete tripartite graph `K_{a,a,a}` on vertices `0..3a`.
pub fn complete_tripartite(a: usize) -> Graph {
    let a = a as Vertex;
    let mut edges = Vec::new();
    for x in 0..3 * a {
        for y in x + 1..3 * a {
            if x / a.max(1) != y / a.max(1) {
                edges.push(Edge::new(x, y));
            }
        }
    }
    Graph::from_edges(3 * a as usize, edges).expect("valid edges")
}

/// A complete tripartite graph sized so that, embedded among `n` vertices
/// and randomly labeled, the average degree is about `d`. One third of its
/// edges must go to make it triangle-free.
pub fn gen_embedded_dense(n: usize, d: f64, seed: u64) -> Result<Graph, GenError> {
    let a = ((n as f64 * d / 6.0).sqrt().round() as usize).max(1);
    if 3 * a > n {
        return Err(GenError::TooFewVertices { needed: 3 * a, n });
    }
    let dense = embed_sparse(&complete_tripartite(a), n)?;
    let label = random_labels(n, &mut rng(seed));
    let edges = dense.edges().iter().map(|e| Edge::new(label[e.lo() as usize], label[e.hi() as usize])).collect();
    Ok(Graph::from_edges(n, edges)?)
}

/// Graph families the harness can instantiate for a grid cell `(n, d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// `triangles` disjoint triangles (default `n/3`), padded to `n`.
    DisjointTriangles {
        #[serde(default)]
        triangles: Option<usize>,
    },
    BipartiteRandom,
    /// Sides of `n/3` vertices, padded to `n`.
    TripartiteMu { gamma: f64 },
    /// Gadget with `m = (n-1)/4`, padded to `n`; `homogeneous` is the value
    /// of every coordinate of `Mx + w`.
    BhmReduction { homogeneous: bool },
    EmbeddedDense,
}

impl GeneratorSpec {
    pub fn generate(&self, n: usize, d: f64, seed: u64) -> Result<Graph, GenError> {
        match self {
            GeneratorSpec::DisjointTriangles { triangles } => {
                let t = triangles.unwrap_or(n / 3);
                if 3 * t > n {
                    return Err(GenError::TooFewVertices { needed: 3 * t, n });
                }
                gen_disjoint_triangles(t, n - 3 * t, seed)
            }
            GeneratorSpec::BipartiteRandom => gen_bipartite_random(n, d, seed),
            GeneratorSpec::TripartiteMu { gamma } => embed_sparse(&gen_tripartite_mu(n / 3, *gamma, seed)?, n),
            GeneratorSpec::BhmReduction { homogeneous } => {
                let m = n.saturating_sub(1) / 4;
                embed_sparse(&gen_bhm_homogeneous(m.max(1), *homogeneous, seed)?.graph, n)
            }
            GeneratorSpec::EmbeddedDense => gen_embedded_dense(n, d, seed),
        }
    }

    /// Whether every output is triangle-free.
    pub fn triangle_free(&self) -> bool {
        matches!(self, GeneratorSpec::BipartiteRandom | GeneratorSpec::BhmReduction { homogeneous: true })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    /// Each edge to one uniform player.
    RandomAssign,
    /// Sorted edges dealt out cyclically.
    RoundRobin,
    /// Each player independently with probability 1/2, redrawn if nobody.
    DuplicateToAll,
    /// Each edge to the owner of its smaller endpoint under a random map.
    VertexOwner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionStrategy {
    pub kind: PartitionKind,
    pub k: usize,
    pub seed: u64,
}

impl PartitionStrategy {
    pub fn apply(&self, graph: Arc<Graph>) -> Result<EdgePartition, GenError> {
        partition_edges(graph, self.kind, self.k, self.seed)
    }
}

pub fn partition_edges(graph: Arc<Graph>, kind: PartitionKind, k: usize, seed: u64) -> Result<EdgePartition, GenError> {
    if k == 0 {
        return Err(GenError::NoPlayers);
    }
    let mut rng = rng(seed);
    let mut parts: Vec<Vec<Edge>> = vec![Vec::new(); k];
    match kind {
        PartitionKind::RandomAssign => {
            for &e in graph.edges() {
                parts[rng.random_range(0..k)].push(e);
            }
        }
        PartitionKind::RoundRobin => {
            for (i, &e) in graph.edges().iter().enumerate() {
                parts[i % k].push(e);
            }
        }
        PartitionKind::DuplicateToAll => {
            for &e in graph.edges() {
                loop {
                    let holders: Vec<PlayerId> = (0..k).filter(|_| rng.random::<bool>()).collect();
                    if !holders.is_empty() {
                        for j in holders {
                            parts[j].push(e);
                        }
                        break;
                    }
                }
            }
        }
        PartitionKind::VertexOwner => {
            let owner: Vec<PlayerId> = (0..graph.n()).map(|_| rng.random_range(0..k)).collect();
            for &e in graph.edges() {
                parts[owner[e.lo() as usize]].push(e);
            }
        }
    }
    let no_dup = kind != PartitionKind::DuplicateToAll;
    Ok(EdgePartition::new(graph, parts, no_dup)?)
}
