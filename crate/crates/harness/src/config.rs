use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use trifree::comm::{EchoProtocol, Mode, Protocol, Simultaneous};
use trifree::generators::{GeneratorSpec, PartitionKind};
use trifree::interactive::FindTriangle;
use trifree::params::{check_epsilon_delta, ParamError};
use trifree::simultaneous::{SimConfig, SimHigh, SimLow, SimOblivious};

use crate::runner::Axis;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid cell {index}: {reason}")]
    Cell { index: usize, reason: String },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("protocol {protocol} does not run in {mode} mode")]
    Mode { protocol: ProtocolId, mode: Mode },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolId {
    /// Interactive protocol told the average degree.
    FindTriangle,
    /// Interactive protocol that estimates the average degree first.
    FindTriangleOblivious,
    SimHigh,
    SimLow,
    SimOblivious,
    /// One bit per player; a cost baseline.
    Echo,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 6] = [
        ProtocolId::FindTriangle,
        ProtocolId::FindTriangleOblivious,
        ProtocolId::SimHigh,
        ProtocolId::SimLow,
        ProtocolId::SimOblivious,
        ProtocolId::Echo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::FindTriangle => "find_triangle",
            ProtocolId::FindTriangleOblivious => "find_triangle_oblivious",
            ProtocolId::SimHigh => "sim_high",
            ProtocolId::SimLow => "sim_low",
            ProtocolId::SimOblivious => "sim_oblivious",
            ProtocolId::Echo => "echo",
        }
    }

    pub fn default_mode(self) -> Mode {
        match self {
            ProtocolId::FindTriangle | ProtocolId::FindTriangleOblivious => Mode::Coordinator,
            _ => Mode::Simultaneous,
        }
    }

    /// Instantiates the protocol; `d` is the input's average degree, used
    /// only by the variants that are told it.
    pub fn build(self, epsilon: f64, delta: f64, d: f64) -> Result<Box<dyn Protocol>, ParamError> {
        let config = SimConfig::new(epsilon, delta)?;
        // a graph without edges still needs a positive guess
        let d = d.max(f64::MIN_POSITIVE);
        Ok(match self {
            ProtocolId::FindTriangle => Box::new(FindTriangle::new(epsilon, delta, Some(d))),
            ProtocolId::FindTriangleOblivious => Box::new(FindTriangle::new(epsilon, delta, None)),
            ProtocolId::SimHigh => Box::new(Simultaneous(SimHigh { config, d })),
            ProtocolId::SimLow => Box::new(Simultaneous(SimLow { config, d })),
            ProtocolId::SimOblivious => Box::new(Simultaneous(SimOblivious { config })),
            ProtocolId::Echo => Box::new(Simultaneous(EchoProtocol)),
        })
    }
}

impl std::fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown protocol `{s}`"))
    }
}

/// One grid point. `d` is the target average degree handed to the
/// generator; families with a fixed shape ignore it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n: usize,
    #[serde(default)]
    pub d: f64,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: ProtocolId,
    /// Defaults to the protocol's natural model.
    #[serde(default)]
    pub mode: Option<Mode>,
    pub generator: GeneratorSpec,
    pub partition: PartitionKind,
    pub grid: Vec<GridCell>,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Fit against this axis across the whole grid instead of per group of
    /// cells that differ in one axis only.
    #[serde(default)]
    pub sweep: Option<Axis>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(self.protocol.default_mode())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if self.grid.is_empty() {
            return Err(ConfigError::EmptyGrid);
        }
        check_epsilon_delta(self.epsilon, self.delta)?;
        let probe = self.protocol.build(self.epsilon, self.delta, 1.0)?;
        if !probe.supports(self.mode()) {
            return Err(ConfigError::Mode { protocol: self.protocol, mode: self.mode() });
        }
        for (index, cell) in self.grid.iter().enumerate() {
            let bad = |reason: &str| ConfigError::Cell { index, reason: reason.to_string() };
            if cell.n < 3 {
                return Err(bad("n must be at least 3"));
            }
            if cell.k == 0 {
                return Err(bad("k must be at least 1"));
            }
            if !(cell.d >= 0.0 && cell.d.is_finite()) {
                return Err(bad("d must be a finite non-negative number"));
            }
            if u32::try_from(cell.n).is_err() {
                return Err(bad("n does not fit vertex ids"));
            }
        }
        Ok(())
    }
}
