//! Degree buckets with base 3 and the degree window the interactive
//! protocol iterates over.
//!
//! Bucket `B_0` holds the degree-0 vertices; for `i >= 1`, `B_i` holds the
//! vertices with `3^(i-1) <= deg(v) < 3^i`.

use thiserror::Error;

use crate::graph::{EdgePartition, Graph, PlayerId, Vertex};

/// `3^i` as a float; exact for the bucket range of any realistic `n`.
pub fn pow3(i: usize) -> f64 {
    3f64.powi(i as i32)
}

/// Index of the bucket holding a vertex of the given degree.
pub fn bucket_index(degree: usize) -> usize {
    let mut i = 0;
    let mut upper = 1usize;
    // smallest i with degree < 3^i
    while degree >= upper {
        i += 1;
        upper = upper.saturating_mul(3);
    }
    i
}

/// Enough buckets for every degree `< n`; at most `floor(log3 n) + 2`.
pub fn bucket_count(n: usize) -> usize {
    bucket_index(n.saturating_sub(1)) + 1
}

/// Lower degree bound `d^-(B_i) = 3^(i-1)`; 0 for the singleton bucket.
pub fn lower_degree(i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        pow3(i - 1)
    }
}

/// Upper degree bound `d^+(B_i) = 3^i`.
pub fn upper_degree(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        pow3(i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bucketing {
    buckets: Vec<Vec<Vertex>>,
}

impl Bucketing {
    pub fn compute(graph: &Graph) -> Self {
        let mut buckets = vec![Vec::new(); bucket_count(graph.n())];
        for v in graph.vertices() {
            let i = bucket_index(graph.degree(v));
            if i >= buckets.len() {
                buckets.resize(i + 1, Vec::new());
            }
            buckets[i].push(v);
        }
        Bucketing { buckets }
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Vertices of `B_i` in increasing order; empty past the last bucket.
    pub fn bucket(&self, i: usize) -> &[Vertex] {
        self.buckets.get(i).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn buckets(&self) -> &[Vec<Vertex>] {
        &self.buckets
    }
}

pub fn compute_bucketing(graph: &Graph) -> Bucketing {
    Bucketing::compute(graph)
}

/// Whether a local degree qualifies for `B~_i^j`: `3^(i-1)/k <= d^j(v) <= 3^i`.
/// Degree-0 vertices never qualify.
pub fn is_local_candidate(local_degree: usize, i: usize, k: usize) -> bool {
    if local_degree == 0 || i == 0 {
        return false;
    }
    let d = local_degree as f64;
    d * k as f64 >= lower_degree(i) && d <= upper_degree(i)
}

/// `B~_i^j`: the vertices player `j` can suspect to lie in bucket `i`
/// from its own degrees alone.
pub fn local_bucket_candidates(partition: &EdgePartition, player: PlayerId, i: usize) -> Vec<Vertex> {
    let part = partition.part(player);
    let k = partition.k();
    partition
        .graph()
        .vertices()
        .filter(|&v| is_local_candidate(part.degree(v), i, k))
        .collect()
}

/// `B~_i`: union over players of [`local_bucket_candidates`], sorted.
pub fn bucket_candidates(partition: &EdgePartition, i: usize) -> Vec<Vertex> {
    let k = partition.k();
    partition
        .graph()
        .vertices()
        .filter(|&v| partition.parts().iter().any(|p| is_local_candidate(p.degree(v), i, k)))
        .collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("epsilon must lie in (0, 1], got {0}")]
    Epsilon(f64),
    #[error("graph has no edges")]
    NoEdges,
    #[error("degree window is empty at this scale: d_l = {d_l} exceeds d_h = {d_h}")]
    Degenerate { d_l: f64, d_h: f64 },
}

/// The degree window `[d_l, d_h]` that contains the lowest full bucket.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeThresholds {
    pub d_l: f64,
    pub d_h: f64,
    pub epsilon: f64,
}

impl DegreeThresholds {
    /// `d_l = eps*d / (2 log2 n)` and `d_h = sqrt(n*d/eps)`.
    pub fn from_average_degree(n: usize, d: f64, epsilon: f64) -> Result<Self, ThresholdError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(ThresholdError::Epsilon(epsilon));
        }
        let log_n = (n as f64).log2().max(1.0);
        let d_l = epsilon * d / (2.0 * log_n);
        let d_h = (n as f64 * d / epsilon).sqrt();
        if d_l > d_h {
            return Err(ThresholdError::Degenerate { d_l, d_h });
        }
        Ok(DegreeThresholds { d_l, d_h, epsilon })
    }

    /// Buckets `i >= 1` with `d^-(B_i) >= lo` and `d^+(B_i) <= hi`.
    pub fn bucket_range(lo: f64, hi: f64, bucket_count: usize) -> Vec<usize> {
        (1..bucket_count).filter(|&i| lower_degree(i) >= lo && upper_degree(i) <= hi).collect()
    }

    pub fn buckets(&self, bucket_count: usize) -> Vec<usize> {
        Self::bucket_range(self.d_l, self.d_h, bucket_count)
    }
}

pub fn degree_thresholds(graph: &Graph, epsilon: f64) -> Result<DegreeThresholds, ThresholdError> {
    if graph.m() == 0 {
        return Err(ThresholdError::NoEdges);
    }
    DegreeThresholds::from_average_degree(graph.n(), graph.average_degree(), epsilon)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::Edge;

    #[test]
    fn bucket_index_examples() {
        assert_eq!(bucket_index(0), 0);
        assert_eq!(bucket_index(1), 1);
        assert_eq!(bucket_index(2), 1);
        assert_eq!(bucket_index(3), 2);
        assert_eq!(bucket_index(8), 2);
        assert_eq!(bucket_index(9), 3);
        assert_eq!(bucket_index(27), 4);
    }

    #[test]
    fn bucket_count_covers_all_degrees() {
        for n in 1..2000usize {
            let count = bucket_count(n);
            assert!(bucket_index(n - 1) < count, "n = {n}");
            // floor(log3 n) + 2
            let mut floor_log3 = 0;
            while 3usize.pow(floor_log3 + 1) <= n {
                floor_log3 += 1;
            }
            assert!(count <= floor_log3 as usize + 2, "n = {n}");
        }
    }

    #[test]
    fn bucketing_examples() {
        let empty = Graph::empty(5);
        let b = compute_bucketing(&empty);
        assert_eq!(b.bucket(0), &[0, 1, 2, 3, 4]);

        let c5 = Graph::new(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        let b = compute_bucketing(&c5);
        assert_eq!(b.bucket(1), &[0, 1, 2, 3, 4]);

        let star = Graph::new(10, (1..10).map(|i| (0, i))).unwrap();
        let b = compute_bucketing(&star);
        assert_eq!(b.bucket(3), &[0]);
        assert_eq!(b.bucket(1), &(1..10).collect::<Vec<_>>()[..]);
        let total: usize = b.buckets().iter().map(Vec::len).sum();
        assert_eq!(total, 10);
    }

    #[test]
    fn candidates_single_player_contain_bucket() {
        let star = Arc::new(Graph::new(10, (1..10).map(|i| (0, i))).unwrap());
        let p = EdgePartition::new(star.clone(), vec![star.edges().to_vec()], true).unwrap();
        let bucketing = compute_bucketing(&star);
        for i in 1..bucketing.len() {
            let cand = local_bucket_candidates(&p, 0, i);
            for v in bucketing.bucket(i) {
                assert!(cand.contains(v));
            }
        }
    }

    #[test]
    fn split_vertex_lands_in_suspect_sets() {
        // deg 10 = 5 + 5 over two players; bucket_index(10) = 3
        let g = Arc::new(Graph::new(11, (1..11).map(|i| (0, i))).unwrap());
        let edges = g.edges().to_vec();
        let p = EdgePartition::new(g, vec![edges[..5].to_vec(), edges[5..].to_vec()], true).unwrap();
        assert_eq!(bucket_index(10), 3);
        for j in 0..2 {
            // [9/2, 27] is the window of B~_3; [3/2, 9] of B~_2; [27/2, 81] of B~_4
            assert!(local_bucket_candidates(&p, j, 3).contains(&0));
            assert!(local_bucket_candidates(&p, j, 2).contains(&0));
            assert!(!local_bucket_candidates(&p, j, 4).contains(&0));
        }
    }

    #[test]
    fn empty_part_has_no_candidates() {
        let g = Arc::new(Graph::new(3, [(0, 1), (1, 2)]).unwrap());
        let p = EdgePartition::new(g.clone(), vec![g.edges().to_vec(), vec![]], false).unwrap();
        for i in 1..5 {
            assert!(local_bucket_candidates(&p, 1, i).is_empty());
        }
        assert!(bucket_candidates(&p, 0).is_empty());
        let _ = Edge::new(0, 1);
    }

    #[test]
    fn thresholds_examples() {
        let t = DegreeThresholds::from_average_degree(10_000, 100.0, 1.0).unwrap();
        assert!((t.d_h - 1000.0).abs() < 1e-9);
        assert!((t.d_l - 50.0 / 10_000f64.log2()).abs() < 1e-12);
        assert!((t.d_l - 3.7629).abs() < 1e-3);
        assert!(matches!(DegreeThresholds::from_average_degree(100, 2.0, 0.0), Err(ThresholdError::Epsilon(_))));
        assert!(matches!(
            DegreeThresholds::from_average_degree(100, 2.0, 1.5),
            Err(ThresholdError::Epsilon(_))
        ));
        assert_eq!(degree_thresholds(&Graph::empty(4), 0.5), Err(ThresholdError::NoEdges));
    }

    #[test]
    fn degenerate_window_is_reported() {
        // d > 4 n log^2 n / eps^3 makes d_l exceed d_h
        let err = DegreeThresholds::from_average_degree(4, 1000.0, 1.0).unwrap_err();
        assert!(matches!(err, ThresholdError::Degenerate { .. }));
    }

    #[test]
    fn bucket_range_respects_window() {
        assert_eq!(DegreeThresholds::bucket_range(0.05, 42.4, 7), vec![1, 2, 3]);
        assert_eq!(DegreeThresholds::bucket_range(2.0, 1000.0, 9), vec![2, 3, 4, 5, 6]);
    }
}
