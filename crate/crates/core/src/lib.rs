//! Multi-party protocols for testing triangle-freeness of an edge-partitioned
//! graph, with bit-exact communication accounting.

pub mod bucket;
pub mod generators;
pub mod comm;
pub mod graph;
pub mod interactive;
pub mod io;
pub mod oracle;
pub mod params;
pub mod primitives;
pub mod reductions;
pub mod simultaneous;

pub use graph::{Edge, EdgePartition, Graph, GraphError, PlayerId, PlayerInput, Triangle, Vertex};
