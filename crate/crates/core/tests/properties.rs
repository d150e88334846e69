use std::sync::Arc;

use proptest::prelude::*;
use trifree::bucket::{bucket_candidates, compute_bucketing, lower_degree};
use trifree::comm::{run_protocol, simultaneous_messages, Mode, RandomTape, Session, Simultaneous, Verdict};
use trifree::generators::{gen_bipartite_random, partition_edges, PartitionKind};
use trifree::interactive::FindTriangle;
use trifree::oracle::{enumerate_triangles, exact_distance_to_triangle_free, greedy_triangle_packing};
use trifree::primitives::{approx_degree, approx_degree_nodup};
use trifree::simultaneous::{SimConfig, SimHigh, SimLow, SimOblivious};
use trifree::{Edge, EdgePartition, Graph};

const KINDS: [PartitionKind; 4] =
    [PartitionKind::RandomAssign, PartitionKind::RoundRobin, PartitionKind::DuplicateToAll, PartitionKind::VertexOwner];

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32), 0..4 * n).prop_map(move |pairs| {
            let mut edges: Vec<Edge> = pairs.into_iter().filter_map(|(a, b)| Edge::try_new(a, b).ok()).collect();
            edges.sort_unstable();
            edges.dedup();
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn partitioned(max_n: usize) -> impl Strategy<Value = EdgePartition> {
    (graph_strategy(max_n), 1usize..6, 0usize..4, any::<u64>())
        .prop_map(|(g, k, kind, seed)| partition_edges(Arc::new(g), KINDS[kind], k, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn buckets_sit_inside_local_suspects(p in partitioned(40)) {
        let g = p.graph();
        let bucketing = compute_bucketing(g);
        let k = p.k() as f64;
        // B_0 holds isolated vertices, which nobody can suspect
        for i in 1..bucketing.len() {
            let suspects = bucket_candidates(&p, i);
            for &v in bucketing.bucket(i) {
                prop_assert!(suspects.binary_search(&v).is_ok(), "bucket {i} vertex {v} not suspected");
            }
            // a suspect's degree is at most a factor k below the bucket
            for &v in &suspects {
                prop_assert!(g.degree(v) as f64 * k >= lower_degree(i));
            }
        }
    }

    #[test]
    fn phase_one_brackets_the_degree(p in partitioned(30), seed in any::<u64>()) {
        let mut session = Session::new(&p, Mode::Coordinator, RandomTape::new(seed), false);
        for v in 0..p.n() as u32 {
            let deg = p.graph().degree(v) as f64;
            match approx_degree(&mut session, v, 3f64.sqrt(), 0.05) {
                Ok(est) => {
                    let k = p.k() as f64;
                    prop_assert!(est.phase1_bound / (2.0 * k) <= deg && deg <= est.phase1_bound);
                    prop_assert!(est.value >= est.phase1_bound / (2.0 * k) && est.value <= est.phase1_bound);
                }
                Err(_) => prop_assert_eq!(deg, 0.0),
            }
        }
    }

    #[test]
    fn nodup_estimate_never_overcounts(g in graph_strategy(40), k in 1usize..6, seed in any::<u64>(), alpha in 1.05f64..4.0) {
        let p = partition_edges(Arc::new(g), PartitionKind::RandomAssign, k, seed).unwrap();
        let mut session = Session::new(&p, Mode::Coordinator, RandomTape::new(seed), false);
        for v in 0..p.n() as u32 {
            let deg = p.graph().degree(v) as f64;
            if let Ok(est) = approx_degree_nodup(&mut session, v, alpha) {
                prop_assert!(est.value <= deg);
                prop_assert!(est.value * alpha >= deg);
            }
        }
    }

    #[test]
    fn simultaneous_messages_ignore_other_players(p in partitioned(30), seed in any::<u64>(), victim in 0usize..6) {
        prop_assume!(p.k() >= 2);
        let victim = victim % p.k();
        let watcher = (victim + 1) % p.k();
        let other = p.with_part(victim, Vec::new()).unwrap();
        let cfg = SimConfig::new(1.0 / 3.0, 0.1).unwrap();
        let d = p.graph().average_degree().max(1.0);
        let (_, a) = simultaneous_messages(&SimLow { config: cfg, d }, &p, &mut RandomTape::new(seed));
        let (_, b) = simultaneous_messages(&SimLow { config: cfg, d }, &other, &mut RandomTape::new(seed));
        prop_assert_eq!(&a[watcher], &b[watcher]);
        let (_, a) = simultaneous_messages(&SimOblivious { config: cfg }, &p, &mut RandomTape::new(seed));
        let (_, b) = simultaneous_messages(&SimOblivious { config: cfg }, &other, &mut RandomTape::new(seed));
        prop_assert_eq!(&a[watcher], &b[watcher]);
    }

    #[test]
    fn runs_are_deterministic(p in partitioned(30), seed in any::<u64>()) {
        let d = p.graph().average_degree().max(1.0);
        let proto = FindTriangle::new(1.0 / 3.0, 0.1, Some(d));
        let a = run_protocol(&p, &proto, Mode::Coordinator, RandomTape::new(seed)).unwrap();
        let b = run_protocol(&p, &proto, Mode::Coordinator, RandomTape::new(seed)).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.total_bits(), b.total_bits());
        prop_assert_eq!(a.ledger.rounds(), b.ledger.rounds());
    }

    #[test]
    fn ledger_totals_add_up(p in partitioned(30), seed in any::<u64>(), blackboard in any::<bool>()) {
        let mode = if blackboard { Mode::Blackboard } else { Mode::Coordinator };
        let proto = FindTriangle::new(1.0 / 3.0, 0.1, None);
        let out = trifree::comm::run_protocol_with(&p, &proto, mode, RandomTape::new(seed), true).unwrap();
        let l = &out.ledger;
        let players: u64 = (0..p.k()).map(|j| l.player_bits(j)).sum();
        prop_assert_eq!(players + l.coordinator_bits(), l.total_bits());
        prop_assert_eq!(l.entries().unwrap().iter().map(|e| e.bits).sum::<u64>(), l.total_bits());
    }

    #[test]
    fn greedy_packing_brackets_exact_distance(g in graph_strategy(9)) {
        prop_assume!(g.m() <= 12);
        let exact = exact_distance_to_triangle_free(&g).unwrap();
        let packing = greedy_triangle_packing(&g).packing_size;
        prop_assert!(packing <= exact && exact <= 3 * packing);
        prop_assert_eq!(exact == 0, enumerate_triangles(&g).is_empty());
    }
}

#[test]
fn no_protocol_reports_a_triangle_on_bipartite_inputs() {
    let cfg = SimConfig::new(1.0 / 3.0, 0.1).unwrap();
    for seed in 0..20u64 {
        let g = Arc::new(gen_bipartite_random(200, 4.0, seed).unwrap());
        for kind in KINDS {
            let p = partition_edges(g.clone(), kind, 4, seed).unwrap();
            let tape = || RandomTape::new(seed);
            let verdicts = [
                run_protocol(&p, &FindTriangle::new(1.0 / 3.0, 0.1, Some(4.0)), Mode::Coordinator, tape()),
                run_protocol(&p, &FindTriangle::new(1.0 / 3.0, 0.1, None), Mode::Blackboard, tape()),
                run_protocol(&p, &Simultaneous(SimHigh { config: cfg, d: 4.0 }), Mode::Simultaneous, tape()),
                run_protocol(&p, &Simultaneous(SimLow { config: cfg, d: 4.0 }), Mode::Simultaneous, tape()),
                run_protocol(&p, &Simultaneous(SimOblivious { config: cfg }), Mode::Simultaneous, tape()),
            ];
            for v in verdicts {
                assert_eq!(v.unwrap().verdict, Verdict::NoTriangleFound);
            }
        }
    }
}
