//! Centralized brute-force ground truth. Nothing here is charged to any
//! ledger; protocols must not call into this module except for the referee's
//! local triangle search.

use itertools::Itertools;
use petgraph::graph::{NodeIndex, UnGraph};
use thiserror::Error;

use crate::bucket::Bucketing;
use crate::graph::{Edge, Graph, Triangle, Vertex};

/// Degree up to which [`max_disjoint_vees`] runs an exact matching.
pub const EXACT_MATCHING_LIMIT: usize = 24;

/// Edge count up to which [`exact_distance_to_triangle_free`] runs.
pub const EXACT_DISTANCE_LIMIT: usize = 24;

fn log2_n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// Calls `visit` on each triangle `u < v < w` in lexicographic order until
/// it returns `false`. Marks `N(u)` once per `u`, so the cost is about
/// `sum over edges uv of deg(v)` with no searching.
fn scan_triangles(graph: &Graph, mut visit: impl FnMut(Triangle) -> bool) {
    let mut mark = vec![false; graph.n()];
    for u in graph.vertices() {
        let nu = graph.neighbors(u);
        let above = nu.partition_point(|&x| x <= u);
        if nu.len() - above < 2 {
            continue;
        }
        for &x in &nu[above..] {
            mark[x as usize] = true;
        }
        for &v in &nu[above..] {
            let nv = graph.neighbors(v);
            for &w in &nv[nv.partition_point(|&x| x <= v)..] {
                if mark[w as usize] && !visit(Triangle::new(u, v, w)) {
                    return;
                }
            }
        }
        for &x in &nu[above..] {
            mark[x as usize] = false;
        }
    }
}

/// All triangles, each sorted, in lexicographic order.
pub fn enumerate_triangles(graph: &Graph) -> Vec<Triangle> {
    let mut out = Vec::new();
    scan_triangles(graph, |t| {
        out.push(t);
        true
    });
    out
}

/// The lexicographically first triangle, if any.
pub fn first_triangle(graph: &Graph) -> Option<Triangle> {
    let mut first = None;
    scan_triangles(graph, |t| {
        first = Some(t);
        false
    });
    first
}

/// Edge-disjoint triangle-vees sharing one source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VeeCertificate {
    pub source: Vertex,
    /// Neighbor pairs `(u, w)` with `u < w` and `{u, w}` an edge.
    pub vees: Vec<(Vertex, Vertex)>,
    /// Set when the greedy fallback was used, so `vees` may be short of maximum.
    pub approximate: bool,
}

impl VeeCertificate {
    pub fn count(&self) -> usize {
        self.vees.len()
    }
}

/// Maximum set of edge-disjoint vees sourced at `v`: a maximum matching on
/// `N(v)` whose edges are the neighbor pairs closing a triangle.
pub fn max_disjoint_vees(graph: &Graph, v: Vertex) -> VeeCertificate {
    max_disjoint_vees_with_limit(graph, v, EXACT_MATCHING_LIMIT)
}

pub fn max_disjoint_vees_with_limit(graph: &Graph, v: Vertex, exact_limit: usize) -> VeeCertificate {
    let nbrs = graph.neighbors(v);
    let mut aux = UnGraph::<Vertex, ()>::with_capacity(nbrs.len(), 0);
    let nodes: Vec<NodeIndex> = nbrs.iter().map(|&u| aux.add_node(u)).collect();
    for (i, &u) in nbrs.iter().enumerate() {
        for (j, &w) in nbrs.iter().enumerate().skip(i + 1) {
            if graph.has_edge(u, w) {
                aux.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let approximate = nbrs.len() > exact_limit;
    let matching = if approximate {
        petgraph::algo::greedy_matching(&aux)
    } else {
        petgraph::algo::maximum_matching(&aux)
    };
    let mut vees: Vec<(Vertex, Vertex)> = matching
        .edges()
        .map(|(a, b)| {
            let (x, y) = (aux[a], aux[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    vees.sort_unstable();
    VeeCertificate { source: v, vees, approximate }
}

/// Whether at least an `eps / (12 log2 n)` fraction of the edges at `v`
/// form disjoint vees.
pub fn is_full_vertex(graph: &Graph, v: Vertex, epsilon: f64) -> bool {
    let deg = graph.degree(v);
    if deg == 0 {
        return false;
    }
    let vees = max_disjoint_vees(graph, v).count();
    vees > 0 && vees as f64 >= epsilon / (12.0 * log2_n(graph.n())) * deg as f64
}

/// Total disjoint vees sourced inside bucket `i` (per-source maxima).
pub fn bucket_vee_count(graph: &Graph, bucketing: &Bucketing, i: usize) -> usize {
    bucketing.bucket(i).iter().map(|&v| max_disjoint_vees(graph, v).count()).sum()
}

/// Whether bucket `i` sources at least `eps n d / (2 log2 n)` disjoint vees.
pub fn is_full_bucket(graph: &Graph, bucketing: &Bucketing, i: usize, epsilon: f64) -> bool {
    if i == 0 {
        return false;
    }
    let total = bucket_vee_count(graph, bucketing, i);
    let need = epsilon * graph.n() as f64 * graph.average_degree() / (2.0 * log2_n(graph.n()));
    total > 0 && total as f64 >= need
}

/// Index of the lowest full bucket, if any.
pub fn lowest_full_bucket(graph: &Graph, bucketing: &Bucketing, epsilon: f64) -> Option<usize> {
    (1..bucketing.len()).find(|&i| is_full_bucket(graph, bucketing, i, epsilon))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FarnessCertificate {
    pub packing: Vec<Triangle>,
    pub packing_size: usize,
    /// Only computed for graphs with at most [`EXACT_DISTANCE_LIMIT`] edges.
    pub exact_distance: Option<usize>,
    /// `packing_size / |E|`; 0 for an edgeless graph.
    pub epsilon_lower_bound: f64,
}

/// Maximal edge-disjoint packing, greedy over triangles in lexicographic
/// order.
pub fn greedy_triangle_packing(graph: &Graph) -> FarnessCertificate {
    let mut used = vec![false; graph.m()];
    let mut packing = Vec::new();
    for t in enumerate_triangles(graph) {
        let idx = t.edges().map(|e| graph.edge_index(e).expect("triangle edge"));
        if idx.iter().all(|&i| !used[i]) {
            for i in idx {
                used[i] = true;
            }
            packing.push(t);
        }
    }
    let packing_size = packing.len();
    let exact_distance = exact_distance_to_triangle_free(graph).ok();
    let epsilon_lower_bound = if graph.m() == 0 { 0.0 } else { packing_size as f64 / graph.m() as f64 };
    FarnessCertificate { packing, packing_size, exact_distance, epsilon_lower_bound }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {edges} edges; exact search is limited to {limit}")]
    TooLarge { edges: usize, limit: usize },
}

/// Minimum number of edge deletions that leave no triangle. Only deleting
/// edges helps: adding an edge never removes a triangle.
pub fn exact_distance_to_triangle_free(graph: &Graph) -> Result<usize, OracleError> {
    if graph.m() > EXACT_DISTANCE_LIMIT {
        return Err(OracleError::TooLarge { edges: graph.m(), limit: EXACT_DISTANCE_LIMIT });
    }
    let triangles: Vec<u32> = enumerate_triangles(graph)
        .into_iter()
        .map(|t| t.edges().iter().fold(0u32, |mask, &e| mask | 1 << graph.edge_index(e).expect("triangle edge")))
        .collect();
    if triangles.is_empty() {
        return Ok(0);
    }
    let candidates: Vec<usize> = {
        let union = triangles.iter().fold(0u32, |a, &b| a | b);
        (0..graph.m()).filter(|i| union >> i & 1 == 1).collect()
    };
    for size in 1..=candidates.len() {
        for subset in candidates.iter().combinations(size) {
            let mask = subset.iter().fold(0u32, |m, &&i| m | 1 << i);
            if triangles.iter().all(|&t| t & mask != 0) {
                return Ok(size);
            }
        }
    }
    unreachable!("deleting every triangle edge always works")
}

/// A vee inside `S` together with the graph edge that closes it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClosingEdge {
    pub source: Vertex,
    pub vee: (Edge, Edge),
    pub closer: Edge,
}

impl ClosingEdge {
    pub fn triangle(&self) -> Triangle {
        Triangle::new(self.source, self.closer.lo(), self.closer.hi())
    }
}

/// Every pair of edges of `s` sharing a source whose third side is in the
/// graph.
pub fn find_closing_edges(graph: &Graph, s: &[Edge]) -> Vec<ClosingEdge> {
    let sub = Graph::from_edges(graph.n(), s.iter().copied().sorted().dedup().collect()).expect("S is a subset of E");
    let mut out = Vec::new();
    for v in sub.vertices() {
        let nbrs = sub.neighbors(v);
        for (i, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[i + 1..] {
                if graph.has_edge(u, w) {
                    out.push(ClosingEdge { source: v, vee: (Edge::new(v, u), Edge::new(v, w)), closer: Edge::new(u, w) });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bucket::compute_bucketing;

    fn complete(n: u32) -> Graph {
        Graph::new(n as usize, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).unwrap()
    }

    fn cycle(n: u32) -> Graph {
        Graph::new(n as usize, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn wheel(rim: u32) -> Graph {
        let mut pairs: Vec<_> = (1..=rim).map(|i| (0, i)).collect();
        pairs.extend((0..rim).map(|i| (1 + i, 1 + (i + 1) % rim)));
        Graph::new(rim as usize + 1, pairs).unwrap()
    }

    fn friendship() -> Graph {
        Graph::new(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap()
    }

    fn disjoint_triangles(t: u32) -> Graph {
        Graph::new(3 * t as usize, (0..t).flat_map(|i| [(3 * i, 3 * i + 1), (3 * i + 1, 3 * i + 2), (3 * i, 3 * i + 2)]))
            .unwrap()
    }

    #[test]
    fn triangle_enumeration_examples() {
        assert_eq!(enumerate_triangles(&complete(3)), vec![Triangle::new(0, 1, 2)]);
        assert!(enumerate_triangles(&cycle(5)).is_empty());
        assert_eq!(enumerate_triangles(&complete(4)).len(), 4);
        assert_eq!(first_triangle(&complete(4)), Some(Triangle::new(0, 1, 2)));
        assert_eq!(first_triangle(&cycle(6)), None);
    }

    #[test]
    fn vee_examples() {
        assert_eq!(max_disjoint_vees(&wheel(5), 0).count(), 2);
        assert_eq!(max_disjoint_vees(&friendship(), 0).count(), 2);
        assert_eq!(max_disjoint_vees(&cycle(6), 0).count(), 0);
        let star = Graph::new(5, (1..5).map(|i| (0, i))).unwrap();
        assert_eq!(max_disjoint_vees(&star, 0).count(), 0);
        let cert = max_disjoint_vees(&friendship(), 0);
        assert!(!cert.approximate);
        for &(u, w) in &cert.vees {
            assert!(friendship().has_edge(u, w));
        }
    }

    #[test]
    fn full_vertex_examples() {
        assert!(is_full_vertex(&friendship(), 0, 1.0));
        let star = Graph::new(10, (1..10).map(|i| (0, i))).unwrap();
        assert!(!is_full_vertex(&star, 3, 1.0));
        assert!(!is_full_vertex(&cycle(5), 0, 1.0));
    }

    #[test]
    fn full_bucket_examples() {
        let c = cycle(8);
        let b = compute_bucketing(&c);
        assert!((0..b.len()).all(|i| !is_full_bucket(&c, &b, i, 1.0)));

        // t = 50 disjoint triangles, eps = 1/3: 150 vees against
        // (1/3) * 150 * 2 / (2 log2 150) ~ 6.9
        let g = disjoint_triangles(50);
        let b = compute_bucketing(&g);
        assert_eq!(bucket_vee_count(&g, &b, 1), 150);
        let need = (1.0 / 3.0) * 150.0 * 2.0 / (2.0 * 150f64.log2());
        assert!(150.0 >= need);
        assert!(is_full_bucket(&g, &b, 1, 1.0 / 3.0));
        assert!(!is_full_bucket(&g, &b, 0, 1.0 / 3.0));
        assert_eq!(lowest_full_bucket(&g, &b, 1.0 / 3.0), Some(1));
    }

    #[test]
    fn packing_examples() {
        let c = greedy_triangle_packing(&disjoint_triangles(50));
        assert_eq!(c.packing_size, 50);
        assert_eq!(c.exact_distance, None);
        let k4 = greedy_triangle_packing(&complete(4));
        assert_eq!(k4.packing_size, 1);
        assert_eq!(k4.exact_distance, Some(2));
        assert!((k4.epsilon_lower_bound - 1.0 / 6.0).abs() < 1e-12);
        let bip = Graph::new(6, [(0, 3), (0, 4), (1, 3), (2, 5)]).unwrap();
        assert_eq!(greedy_triangle_packing(&bip).packing_size, 0);
    }

    #[test]
    fn exact_distance_examples() {
        assert_eq!(exact_distance_to_triangle_free(&complete(3)), Ok(1));
        assert_eq!(exact_distance_to_triangle_free(&complete(4)), Ok(2));
        assert_eq!(exact_distance_to_triangle_free(&cycle(6)), Ok(0));
        // K_5 minus its largest bipartite subgraph (6 edges) leaves 4
        assert_eq!(exact_distance_to_triangle_free(&complete(5)), Ok(4));
        assert_eq!(
            exact_distance_to_triangle_free(&complete(8)),
            Err(OracleError::TooLarge { edges: 28, limit: EXACT_DISTANCE_LIMIT })
        );
    }

    #[test]
    fn closing_edge_examples() {
        let k3 = complete(3);
        let hits = find_closing_edges(&k3, &[Edge::new(0, 1), Edge::new(1, 2)]);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].closer, Edge::new(0, 2));
        assert_eq!(hits[0].triangle(), Triangle::new(0, 1, 2));

        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(find_closing_edges(&path, path.edges()).is_empty());

        let k4 = complete(4);
        assert_eq!(find_closing_edges(&k4, k4.edges()).len(), 12);
    }
}
