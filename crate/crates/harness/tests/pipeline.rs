use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trifree::generators::{GeneratorSpec, PartitionKind};
use trifree_harness::fit::fit_scaling;
use trifree_harness::{run_experiment, ExperimentConfig, GridCell, ProtocolId};

#[test]
fn noisy_quarter_power_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let pts: Vec<(f64, f64)> = (8..=16)
            .map(|e| {
                let n = 2f64.powi(e);
                (n, 3.0 * n.powf(0.25) * rng.random_range(0.95..1.05))
            })
            .collect();
        let f = fit_scaling(&pts).unwrap();
        assert!((0.2..=0.3).contains(&f.slope), "slope {}", f.slope);
    }
}

fn config(protocol: ProtocolId, generator: GeneratorSpec, partition: PartitionKind) -> ExperimentConfig {
    ExperimentConfig {
        protocol,
        mode: None,
        generator,
        partition,
        grid: vec![GridCell { n: 90, d: 3.0, k: 3 }, GridCell { n: 180, d: 3.0, k: 5 }],
        epsilon: 1.0 / 3.0,
        delta: 0.1,
        trials: 5,
        seed: 21,
        sweep: None,
        output: None,
    }
}

#[test]
fn triangle_free_inputs_are_always_accepted() {
    for p in [ProtocolId::FindTriangle, ProtocolId::FindTriangleOblivious, ProtocolId::SimHigh, ProtocolId::SimLow, ProtocolId::SimOblivious] {
        for kind in [PartitionKind::RandomAssign, PartitionKind::DuplicateToAll, PartitionKind::VertexOwner] {
            let r = run_experiment(&config(p, GeneratorSpec::BipartiteRandom, kind)).unwrap();
            for c in &r.cells {
                assert_eq!(c.negatives, 5);
                assert_eq!(c.negative_correct_rate, Some(1.0), "{p} {kind:?}");
            }
        }
    }
}

#[test]
fn blackboard_mode_runs_the_interactive_protocol() {
    let mut c = config(ProtocolId::FindTriangle, GeneratorSpec::DisjointTriangles { triangles: None }, PartitionKind::RoundRobin);
    c.mode = Some(trifree::comm::Mode::Blackboard);
    let r = run_experiment(&c).unwrap();
    assert!(r.records.iter().all(|x| x.has_triangle && x.bits > 0));
    assert!(r.cells.iter().all(|c| c.detection_rate.unwrap() >= 0.8));
}
