use std::sync::Arc;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use trifree::comm::{run_protocol, Mode, RandomTape, Session, Simultaneous};
use trifree::generators::{partition_edges, tripartite_mu_parts, PartitionKind};
use trifree::primitives::{sample_adjacent_edge, sample_uniform_edge};
use trifree::reductions::{embed_input, symmetrize_run, EmbedAssignment};
use trifree::simultaneous::{SimConfig, SimLow};
use trifree::{Edge, EdgePartition, Graph};

fn chi_squared_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

fn duplicated(g: Graph, k: usize) -> EdgePartition {
    let p = partition_edges(Arc::new(g), PartitionKind::DuplicateToAll, k, 17).unwrap();
    assert!(p.graph().edges().iter().any(|&e| p.multiplicity(e) > 1));
    p
}

#[test]
fn uniform_edge_sampler_ignores_multiplicity() {
    let g = Graph::new(20, (0..50u32).map(|i| (i % 20, (i % 20 + 1 + i / 20) % 20))).unwrap();
    assert_eq!(g.m(), 50);
    let p = duplicated(g, 4);
    let mut session = Session::new(&p, Mode::Coordinator, RandomTape::new(1), false);
    let mut counts = vec![0u64; 50];
    for _ in 0..20_000 {
        let e = sample_uniform_edge(&mut session).unwrap();
        counts[p.graph().edge_index(e).unwrap()] += 1;
    }
    assert!(chi_squared_p(&counts) > 1e-3);
}

#[test]
fn adjacent_edge_sampler_ignores_multiplicity() {
    let g = Graph::new(51, (1..=50u32).map(|v| (0, v))).unwrap();
    let p = duplicated(g, 5);
    let mut session = Session::new(&p, Mode::Coordinator, RandomTape::new(2), false);
    let mut counts = vec![0u64; 50];
    for _ in 0..20_000 {
        let e = sample_adjacent_edge(&mut session, 0).unwrap();
        counts[e.other(0) as usize - 1] += 1;
    }
    assert!(chi_squared_p(&counts) > 1e-3);
}

#[test]
fn symmetrization_adds_no_error() {
    let cfg = SimConfig::new(1.0 / 3.0, 0.1).unwrap();
    let proto = Simultaneous(SimLow { config: cfg, d: 2.0 });
    for seed in 0..30 {
        let x = tripartite_mu_parts(20, 0.9, seed).unwrap();
        let out = symmetrize_run(&proto, 60, &x, 6, RandomTape::new(seed)).unwrap();
        let mut tape = RandomTape::new(seed);
        tape.step();
        let direct = run_protocol(&embed_input(60, &x, out.assignment).unwrap(), &proto, Mode::Simultaneous, tape).unwrap();
        assert_eq!(out.verdict, direct.verdict);
        assert_eq!(out.total_bits, direct.total_bits());
        let (i, j) = (out.assignment.i, out.assignment.j);
        assert_eq!(out.alice_bob_bits, direct.ledger.player_bits(i) + direct.ledger.player_bits(j));
    }
}

#[test]
fn embedding_preserves_the_union() {
    let x = [vec![Edge::new(0, 1)], vec![Edge::new(1, 2)], vec![Edge::new(0, 2), Edge::new(2, 3)]];
    let p = embed_input(4, &x, EmbedAssignment::new(1, 3, 5).unwrap()).unwrap();
    let mut union: Vec<Edge> = x.concat();
    union.sort_unstable();
    assert_eq!(p.graph().edges(), &union[..]);
}
