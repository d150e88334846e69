//! Undirected simple graphs and their distribution among `k` players.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex identifier, `0..n`.
pub type Vertex = u32;

/// Player identifier, `0..k`.
pub type PlayerId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("edge {0} listed more than once")]
    DuplicateEdge(Edge),
    #[error("player {player} holds {edge}, which is not a graph edge")]
    ForeignEdge { player: PlayerId, edge: Edge },
    #[error("edge {0} is not held by any player")]
    UnheldEdge(Edge),
    #[error("partition declared duplicate-free but {0} is held by several players")]
    Duplicated(Edge),
    #[error("a partition needs at least one player")]
    NoPlayers,
}

/// Unordered vertex pair, stored with `lo < hi` so the derived order is
/// lexicographic on the sorted pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    lo: Vertex,
    hi: Vertex,
}

impl Edge {
    /// Panics on a self-loop; use [`Edge::try_new`] for unchecked input.
    pub fn new(a: Vertex, b: Vertex) -> Self {
        Self::try_new(a, b).expect("self-loop")
    }

    pub fn try_new(a: Vertex, b: Vertex) -> Result<Self, GraphError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Ok(Edge { lo: b, hi: a }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(a)),
        }
    }

    pub fn lo(self) -> Vertex {
        self.lo
    }

    pub fn hi(self) -> Vertex {
        self.hi
    }

    pub fn endpoints(self) -> (Vertex, Vertex) {
        (self.lo, self.hi)
    }

    pub fn touches(self, v: Vertex) -> bool {
        self.lo == v || self.hi == v
    }

    /// The endpoint that is not `v`. `v` must be an endpoint.
    pub fn other(self, v: Vertex) -> Vertex {
        debug_assert!(self.touches(v));
        if self.lo == v {
            self.hi
        } else {
            self.lo
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.lo, self.hi)
    }
}

/// A triangle as a sorted vertex triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triangle([Vertex; 3]);

impl Triangle {
    pub fn new(a: Vertex, b: Vertex, c: Vertex) -> Self {
        let mut t = [a, b, c];
        t.sort_unstable();
        Triangle(t)
    }

    pub fn vertices(self) -> [Vertex; 3] {
        self.0
    }

    pub fn edges(self) -> [Edge; 3] {
        let [a, b, c] = self.0;
        [Edge::new(a, b), Edge::new(a, c), Edge::new(b, c)]
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "({a}, {b}, {c})")
    }
}

/// Compressed sorted adjacency lists.
#[derive(Clone, Debug, Default)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl Adjacency {
    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for e in edges {
            offsets[e.lo as usize + 1] += 1;
            offsets[e.hi as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0; offsets[n]];
        for e in edges {
            targets[cursor[e.lo as usize]] = e.hi;
            cursor[e.lo as usize] += 1;
            targets[cursor[e.hi as usize]] = e.lo;
            cursor[e.hi as usize] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Adjacency { offsets, targets }
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn contains(&self, a: Vertex, b: Vertex) -> bool {
        let (x, y) = if self.degree(a) <= self.degree(b) { (a, b) } else { (b, a) };
        self.neighbors(x).binary_search(&y).is_ok()
    }
}

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Adjacency,
}

impl Graph {
    /// Builds a graph from vertex pairs. Rejects self-loops, out-of-range
    /// vertices and repeated pairs.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            for x in [a, b] {
                if x as usize >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            edges.push(Edge::try_new(a, b)?);
        }
        Self::from_edges(n, edges)
    }

    pub fn from_edges(n: usize, mut edges: Vec<Edge>) -> Result<Self, GraphError> {
        if let Some(e) = edges.iter().find(|e| e.hi as usize >= n) {
            return Err(GraphError::VertexOutOfRange { vertex: e.hi, n });
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0]));
        }
        let adjacency = Adjacency::from_edges(n, &edges);
        Ok(Graph { n, edges, adjacency })
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: Vec::new(), adjacency: Adjacency::from_edges(n, &[]) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency.degree(v)
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        self.adjacency.neighbors(v)
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        a != b && (a as usize) < self.n && (b as usize) < self.n && self.adjacency.contains(a, b)
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.has_edge(e.lo, e.hi)
    }

    /// Position of `e` in [`Graph::edges`].
    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn has_triangle(&self, t: Triangle) -> bool {
        t.edges().iter().all(|&e| self.contains(e))
    }

    /// Average degree `2|E|/n` (0 for the empty vertex set).
    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n as f64
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        0..self.n as Vertex
    }
}

/// One player's private edge set `E_j` with its local adjacency.
#[derive(Clone, Debug)]
pub struct PlayerInput {
    edges: Vec<Edge>,
    adjacency: Adjacency,
}

impl PlayerInput {
    fn new(n: usize, mut edges: Vec<Edge>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let adjacency = Adjacency::from_edges(n, &edges);
        PlayerInput { edges, adjacency }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `d^j(v)`: degree of `v` in this player's input.
    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency.degree(v)
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        self.adjacency.neighbors(v)
    }

    pub fn holds(&self, e: Edge) -> bool {
        self.adjacency.contains(e.lo, e.hi)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// The players' edge sets `E_1..E_k`; their union is exactly the graph's
/// edge set and an edge may be held by several players.
#[derive(Clone, Debug)]
pub struct EdgePartition {
    graph: Arc<Graph>,
    parts: Vec<PlayerInput>,
    holder_offsets: Vec<usize>,
    holders: Vec<PlayerId>,
    no_duplication: bool,
}

impl EdgePartition {
    /// Validates the parts against `graph`. When `no_duplication` is set the
    /// parts must be pairwise disjoint.
    pub fn new(graph: Arc<Graph>, parts: Vec<Vec<Edge>>, no_duplication: bool) -> Result<Self, GraphError> {
        if parts.is_empty() {
            return Err(GraphError::NoPlayers);
        }
        let m = graph.m();
        let mut counts = vec![0usize; m + 1];
        let mut inputs = Vec::with_capacity(parts.len());
        for (player, part) in parts.into_iter().enumerate() {
            let input = PlayerInput::new(graph.n(), part);
            for &e in input.edges() {
                let idx = graph.edge_index(e).ok_or(GraphError::ForeignEdge { player, edge: e })?;
                counts[idx + 1] += 1;
            }
            inputs.push(input);
        }
        for (idx, &e) in graph.edges().iter().enumerate() {
            match counts[idx + 1] {
                0 => return Err(GraphError::UnheldEdge(e)),
                1 => {}
                _ if no_duplication => return Err(GraphError::Duplicated(e)),
                _ => {}
            }
        }
        for i in 0..m {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut holders = vec![0; counts[m]];
        for (player, input) in inputs.iter().enumerate() {
            for &e in input.edges() {
                let idx = graph.edge_index(e).expect("validated above");
                holders[cursor[idx]] = player;
                cursor[idx] += 1;
            }
        }
        Ok(EdgePartition { graph, parts: inputs, holder_offsets: counts, holders, no_duplication })
    }

    /// Like [`EdgePartition::new`], deriving the duplication flag from the data.
    pub fn from_parts(graph: Arc<Graph>, parts: Vec<Vec<Edge>>) -> Result<Self, GraphError> {
        let p = Self::new(graph, parts, false)?;
        let disjoint = (0..p.graph.m()).all(|i| p.holder_offsets[i + 1] - p.holder_offsets[i] == 1);
        Ok(EdgePartition { no_duplication: disjoint, ..p })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<Graph> {
        Arc::clone(&self.graph)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn no_duplication(&self) -> bool {
        self.no_duplication
    }

    pub fn part(&self, player: PlayerId) -> &PlayerInput {
        &self.parts[player]
    }

    pub fn parts(&self) -> &[PlayerInput] {
        &self.parts
    }

    /// Players holding the edge with the given index in [`Graph::edges`].
    pub fn holders_of_index(&self, idx: usize) -> &[PlayerId] {
        &self.holders[self.holder_offsets[idx]..self.holder_offsets[idx + 1]]
    }

    pub fn holders(&self, e: Edge) -> &[PlayerId] {
        match self.graph.edge_index(e) {
            Some(idx) => self.holders_of_index(idx),
            None => &[],
        }
    }

    /// Number of players holding `e`.
    pub fn multiplicity(&self, e: Edge) -> usize {
        self.holders(e).len()
    }

    /// Replaces one player's part, keeping the others. The graph is rebuilt
    /// as the union of the new parts on the same vertex set, so the result
    /// is a valid partition of a possibly different graph.
    pub fn with_part(&self, player: PlayerId, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut parts: Vec<Vec<Edge>> = self.parts.iter().map(|p| p.edges().to_vec()).collect();
        parts[player] = edges;
        let mut union: Vec<Edge> = parts.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        let graph = Graph::from_edges(self.n(), union)?;
        Self::new(Arc::new(graph), parts, false)
    }
}
