//! Experiment orchestration: scenarios, training, evaluation, benchmarking
//! against the PSO planner, and CSV export.
//!
//! Every random stream is derived from the run's master seed, so a run is
//! reproducible end to end from `(RunConfig, seed)`. Wall-clock latencies are
//! kept out of the per-episode metrics files for the same reason and written
//! to separate latency files.

mod bench;
mod evaluate;
mod export;
mod metrics;
mod rollout;
mod train;

pub use bench::{bench, improvement_pct, BenchReport, BenchRow, BENCH_HEADER};
pub use evaluate::{evaluate, EvalReport};
pub use export::{export_field_grid, field_grid, write_field_grid, write_manifest, GridRow, FIELD_GRID_HEADER};
pub use metrics::{
    read_metrics_csv, write_latency_csv, write_metrics_csv, write_q_csv, LatencyRow, MetricsRecord, QRow, Summary,
    LATENCY_HEADER, METRICS_HEADER, Q_HEADER,
};
pub use rollout::{run_episode, Controller, EpisodeLog, LogOptions};
pub use train::{init_agents, train, TrainOutcome, TrainProgress};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::DdpgConfig;
use crate::env::ScenarioConfig;
use crate::pso::PsoParams;
use crate::{Error, Result};

/// The named scenarios: `(name, n_uavs, n_obstacles)`.
pub const SCENARIOS: [(&str, usize, usize); 8] = [
    ("2U1O", 2, 1),
    ("3U1O", 3, 1),
    ("5U1O", 5, 1),
    ("7U1O", 7, 1),
    ("10U1O", 10, 1),
    ("3U2O", 3, 2),
    ("5U2O", 5, 2),
    ("7U2O", 7, 2),
];

/// Environment defaults with the UAV and obstacle counts of a named scenario.
pub fn scenario(name: &str) -> Result<ScenarioConfig> {
    SCENARIOS
        .iter()
        .find(|(n, _, _)| n.eq_ignore_ascii_case(name))
        .map(|&(_, n_uavs, n_obstacles)| ScenarioConfig {
            n_uavs,
            n_obstacles,
            ..ScenarioConfig::default()
        })
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario_name: String,
    pub scenario: ScenarioConfig,
    pub agent: DdpgConfig,
    pub episodes: usize,
    /// Episodes between checkpoints during training; 0 saves only at the end.
    pub checkpoint_interval: usize,
    /// Score training rewards on PSO-separated positions.
    pub training_repair: bool,
    /// PSO budget of the separation repair inside the reward.
    pub repair: PsoParams,
    /// PSO budget of the baseline planner.
    pub baseline: PsoParams,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario_name: "2U1O".into(),
            scenario: ScenarioConfig::default(),
            agent: DdpgConfig::default(),
            episodes: 1500,
            checkpoint_interval: 100,
            training_repair: true,
            repair: PsoParams::default(),
            baseline: crate::baseline::default_params(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn for_scenario(name: &str) -> Result<Self> {
        Ok(Self {
            scenario_name: name.to_string(),
            scenario: scenario(name)?,
            ..Self::default()
        })
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(Error::InvalidParameter(format!("seed {} exceeds 2^63 - 1", self.seed)));
        }
        self.scenario.validate()?;
        self.agent.validate()
    }

    /// Seed of training episode `episode`.
    pub fn episode_seed(&self, episode: usize) -> u64 {
        derive_seed(self.seed, STREAM_TRAIN, episode as u64)
    }

    /// Seed of evaluation or benchmark episode `episode`.
    pub fn eval_seed(&self, episode: usize) -> u64 {
        derive_seed(self.seed, STREAM_EVAL, episode as u64)
    }

    /// Seed of UAV `uav`'s agent.
    pub fn agent_seed(&self, uav: usize) -> u64 {
        derive_seed(self.seed, STREAM_AGENT, uav as u64)
    }
}

const STREAM_TRAIN: u64 = 1;
const STREAM_EVAL: u64 = 2;
const STREAM_AGENT: u64 = 3;

/// Independent sub-seed for `(stream, index)` via two rounds of splitmix64,
/// reduced to 63 bits so it fits a TOML integer.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(master ^ stream.rotate_left(32)) ^ index) >> 1
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
