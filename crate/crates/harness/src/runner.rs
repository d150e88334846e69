use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use trifree::comm::{run_protocol, Mode, RandomTape, RuntimeError};
use trifree::generators::{partition_edges, GenError};
use trifree::oracle::first_triangle;
use trifree::{EdgePartition, Graph};

use crate::config::{ConfigError, ExperimentConfig, GridCell};
use crate::fit::{fit_scaling, Fit};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cell {cell} trial {trial}: {source}")]
    Generate { cell: usize, trial: usize, source: GenError },
    #[error("cell {cell} trial {trial}: {source}")]
    Protocol { cell: usize, trial: usize, source: RuntimeError },
}

/// SplitMix64 finalizer; decorrelates counter-derived seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in cell `cell`; depends on nothing else, so results
/// do not depend on scheduling.
pub fn trial_seed(master: u64, cell: usize, trial: usize) -> u64 {
    mix(mix(mix(master) ^ cell as u64) ^ trial as u64)
}

/// Independent seeds for the graph, the partition and the public tape.
pub fn stage_seeds(seed: u64) -> [u64; 3] {
    [mix(seed ^ 1), mix(seed ^ 2), mix(seed ^ 3)]
}

/// The instance a trial runs on.
pub fn build_instance(config: &ExperimentConfig, cell: usize, trial: usize) -> Result<EdgePartition, RunError> {
    let GridCell { n, d, k } = config.grid[cell];
    let [g_seed, p_seed, _] = stage_seeds(trial_seed(config.seed, cell, trial));
    let graph = config.generator.generate(n, d, g_seed).map_err(|source| RunError::Generate { cell, trial, source })?;
    partition_edges(Arc::new(graph), config.partition, k, p_seed).map_err(|source| RunError::Generate { cell, trial, source })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub cell: usize,
    pub trial: usize,
    pub n: usize,
    pub d: f64,
    pub k: usize,
    pub seed: u64,
    pub edges: usize,
    pub average_degree: f64,
    pub has_triangle: bool,
    pub found: bool,
    pub correct: bool,
    pub bits: u64,
    pub max_player_bits: u64,
    pub rounds: u32,
    pub capped_messages: u64,
    pub cap_hits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n: usize,
    pub d: f64,
    pub k: usize,
    pub trials: usize,
    pub positives: usize,
    /// Fraction of triangle-bearing instances where a triangle was found.
    pub detection_rate: Option<f64>,
    pub negatives: usize,
    /// Fraction of triangle-free instances answered "no triangle".
    pub negative_correct_rate: Option<f64>,
    /// Fraction of all trials answered correctly.
    pub success_rate: f64,
    pub mean_bits: f64,
    pub max_bits: u64,
    pub mean_rounds: f64,
    pub cap_hit_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    N,
    D,
    K,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::D => "d",
            Axis::K => "k",
        }
    }

    fn value(self, c: &CellSummary) -> f64 {
        match self {
            Axis::N => c.n as f64,
            Axis::D => c.d,
            Axis::K => c.k as f64,
        }
    }
}

/// Slope of mean bits along one axis, the other two held fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisFit {
    pub axis: Axis,
    pub cells: Vec<usize>,
    pub fit: Fit,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
    pub fits: Vec<AxisFit>,
}

impl ExperimentResult {
    pub fn fit(&self, axis: Axis) -> Option<&Fit> {
        self.fits.iter().find(|f| f.axis == axis).map(|f| &f.fit)
    }
}

fn run_trial(config: &ExperimentConfig, mode: Mode, cell: usize, trial: usize) -> Result<TrialRecord, RunError> {
    let GridCell { n, d, k } = config.grid[cell];
    let seed = trial_seed(config.seed, cell, trial);
    let partition = build_instance(config, cell, trial)?;
    let graph: &Graph = partition.graph();
    let average_degree = graph.average_degree();
    let protocol = config
        .protocol
        .build(config.epsilon, config.delta, average_degree)
        .map_err(ConfigError::from)?;
    let [_, _, tape_seed] = stage_seeds(seed);
    let outcome = run_protocol(&partition, protocol.as_ref(), mode, RandomTape::new(tape_seed))
        .map_err(|source| RunError::Protocol { cell, trial, source })?;
    let has_triangle = first_triangle(graph).is_some();
    let found = outcome.verdict.found();
    Ok(TrialRecord {
        cell,
        trial,
        n,
        d,
        k,
        seed,
        edges: graph.m(),
        average_degree,
        has_triangle,
        found,
        correct: found == has_triangle,
        bits: outcome.total_bits(),
        max_player_bits: (0..k).map(|j| outcome.ledger.player_bits(j)).max().unwrap_or(0),
        rounds: outcome.ledger.rounds(),
        capped_messages: outcome.stats.capped_messages,
        cap_hits: outcome.stats.cap_hits,
    })
}

fn rate(hits: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

fn summarize(cell: usize, grid: &GridCell, records: &[TrialRecord]) -> CellSummary {
    let trials = records.len();
    let positives = records.iter().filter(|r| r.has_triangle).count();
    let detected = records.iter().filter(|r| r.has_triangle && r.found).count();
    let negatives = trials - positives;
    let rejected = records.iter().filter(|r| !r.has_triangle && !r.found).count();
    let capped: u64 = records.iter().map(|r| r.capped_messages).sum();
    let hits: u64 = records.iter().map(|r| r.cap_hits).sum();
    CellSummary {
        cell,
        n: grid.n,
        d: grid.d,
        k: grid.k,
        trials,
        positives,
        detection_rate: rate(detected, positives),
        negatives,
        negative_correct_rate: rate(rejected, negatives),
        success_rate: records.iter().filter(|r| r.correct).count() as f64 / trials as f64,
        mean_bits: records.iter().map(|r| r.bits as f64).sum::<f64>() / trials as f64,
        max_bits: records.iter().map(|r| r.bits).max().unwrap_or(0),
        mean_rounds: records.iter().map(|r| f64::from(r.rounds)).sum::<f64>() / trials as f64,
        cap_hit_rate: if capped == 0 { 0.0 } else { hits as f64 / capped as f64 },
    }
}

/// Per-cell summaries of records tagged with their grid cell, in cell order.
pub fn summarize_records(records: &[(GridCell, TrialRecord)]) -> Vec<CellSummary> {
    let mut ids: Vec<usize> = records.iter().map(|(_, r)| r.cell).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let grid = records.iter().find(|(_, r)| r.cell == id).map(|(g, _)| *g).expect("id taken from records");
            let members: Vec<TrialRecord> =
                records.iter().filter(|(_, r)| r.cell == id).map(|(_, r)| r.clone()).collect();
            summarize(id, &grid, &members)
        })
        .collect()
}

/// One fit of mean bits against `axis` over all cells, whatever the other
/// axes do; for diagonal sweeps such as `d = sqrt(n)`.
pub fn sweep_fit(cells: &[CellSummary], axis: Axis) -> Option<AxisFit> {
    let used: Vec<&CellSummary> = cells.iter().filter(|c| c.mean_bits > 0.0 && axis.value(c) > 0.0).collect();
    let points: Vec<(f64, f64)> = used.iter().map(|c| (axis.value(c), c.mean_bits)).collect();
    let fit = fit_scaling(&points).ok()?;
    Some(AxisFit { axis, cells: used.iter().map(|c| c.cell).collect(), fit })
}

/// Fits along every axis that takes at least four distinct values while the
/// others stay fixed. Cells with zero mean bits are skipped.
pub fn axis_fits(cells: &[CellSummary]) -> Vec<AxisFit> {
    let mut out = Vec::new();
    for axis in [Axis::N, Axis::D, Axis::K] {
        let others = |c: &CellSummary| -> [u64; 3] {
            let key = [c.n as f64, c.d, c.k as f64];
            let skip = axis as usize;
            let mut k = [0u64; 3];
            for (i, v) in key.iter().enumerate() {
                if i != skip {
                    k[i] = v.to_bits();
                }
            }
            k
        };
        let mut groups: Vec<([u64; 3], Vec<&CellSummary>)> = Vec::new();
        for c in cells.iter().filter(|c| c.mean_bits > 0.0 && axis.value(c) > 0.0) {
            match groups.iter_mut().find(|(key, _)| *key == others(c)) {
                Some((_, members)) => members.push(c),
                None => groups.push((others(c), vec![c])),
            }
        }
        for (_, members) in groups {
            let points: Vec<(f64, f64)> = members.iter().map(|c| (axis.value(c), c.mean_bits)).collect();
            let mut xs: Vec<u64> = points.iter().map(|p| p.0.to_bits()).collect();
            xs.sort_unstable();
            xs.dedup();
            if xs.len() < 4 {
                continue;
            }
            if let Ok(fit) = fit_scaling(&points) {
                out.push(AxisFit { axis, cells: members.iter().map(|c| c.cell).collect(), fit });
            }
        }
    }
    out
}

/// Runs every (cell, trial) pair on the rayon pool and merges the results
/// in (cell, trial) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, RunError> {
    config.validate()?;
    let mode = config.mode();
    let jobs: Vec<(usize, usize)> =
        (0..config.grid.len()).flat_map(|c| (0..config.trials).map(move |t| (c, t))).collect();
    let records = jobs
        .par_iter()
        .map(|&(cell, trial)| run_trial(config, mode, cell, trial))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<CellSummary> = config
        .grid
        .iter()
        .enumerate()
        .map(|(i, g)| summarize(i, g, &records[i * config.trials..(i + 1) * config.trials]))
        .collect();
    let fits = match config.sweep {
        Some(axis) => sweep_fit(&cells, axis).into_iter().collect(),
        None => axis_fits(&cells),
    };
    Ok(ExperimentResult { config: config.clone(), records, cells, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use trifree::generators::{GeneratorSpec, PartitionKind};

    use crate::config::ProtocolId;

    fn config(generator: GeneratorSpec, protocol: ProtocolId) -> ExperimentConfig {
        ExperimentConfig {
            protocol,
            mode: None,
            generator,
            partition: PartitionKind::RandomAssign,
            grid: vec![GridCell { n: 60, d: 2.0, k: 3 }, GridCell { n: 90, d: 2.0, k: 3 }],
            epsilon: 1.0 / 3.0,
            delta: 0.1,
            trials: 4,
            seed: 9,
            sweep: None,
            output: None,
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = trial_seed(1, 0, 0);
        assert_eq!(a, trial_seed(1, 0, 0));
        assert_ne!(a, trial_seed(1, 0, 1));
        assert_ne!(a, trial_seed(1, 1, 0));
        assert_ne!(a, trial_seed(2, 0, 0));
    }

    #[test]
    fn records_come_back_in_order() {
        let r = run_experiment(&config(GeneratorSpec::BipartiteRandom, ProtocolId::SimLow)).unwrap();
        let order: Vec<(usize, usize)> = r.records.iter().map(|x| (x.cell, x.trial)).collect();
        let expected: Vec<(usize, usize)> = (0..2).flat_map(|c| (0..4).map(move |t| (c, t))).collect();
        assert_eq!(order, expected);
        assert!(r.cells.iter().all(|c| c.negative_correct_rate == Some(1.0) && c.detection_rate.is_none()));
    }

    #[test]
    fn echo_costs_k_bits() {
        let r = run_experiment(&config(GeneratorSpec::DisjointTriangles { triangles: None }, ProtocolId::Echo)).unwrap();
        assert!(r.records.iter().all(|x| x.bits == 3 && !x.found && !x.correct));
        assert_eq!(r.cells[0].detection_rate, Some(0.0));
    }

    #[test]
    fn generation_errors_name_the_cell() {
        let mut c = config(GeneratorSpec::BipartiteRandom, ProtocolId::SimLow);
        c.grid[1].d = 1000.0;
        assert!(matches!(run_experiment(&c), Err(RunError::Generate { cell: 1, .. })));
    }
}
