use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::export::write_manifest;
use super::metrics::{
    read_metrics, write_latency_csv, write_metrics, write_metrics_csv, LatencyRow, MetricsRecord, Summary,
};
use super::rollout::{run_episode, Controller, LogOptions};
use super::{ensure_dir, RunConfig};
use crate::agent::{read_checkpoint, write_checkpoint, Checkpoint, DdpgAgent, ObsEncoder};
use crate::{Error, Result};

/// Harness state stored alongside the agents in a training checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainProgress {
    pub episodes_done: usize,
    pub run: RunConfig,
    /// Metrics CSV of every finished episode.
    pub metrics_csv: String,
}

impl TrainProgress {
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        toml::from_str(&ckpt.meta).map_err(|e| Error::Checkpoint(format!("progress: {e}")))
    }

    pub fn records(&self) -> Result<Vec<MetricsRecord>> {
        read_metrics(self.metrics_csv.as_bytes())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agents: Vec<DdpgAgent>,
    pub records: Vec<MetricsRecord>,
    /// Latencies of the episodes run by this call only.
    pub latency: Vec<LatencyRow>,
    pub checkpoint: PathBuf,
}

/// Fresh agents for a run, one per UAV.
pub fn init_agents(run: &RunConfig) -> Result<Vec<DdpgAgent>> {
    let obs_dim = run.scenario.obs_dim();
    let encoder = ObsEncoder::for_scenario(&run.scenario);
    (0..run.scenario.n_uavs)
        .map(|i| DdpgAgent::new(obs_dim, run.agent.clone(), encoder, run.agent_seed(i)))
        .collect()
}

fn save(path: &Path, run: &RunConfig, agents: &[DdpgAgent], records: &[MetricsRecord]) -> Result<()> {
    let mut csv = Vec::new();
    write_metrics(&mut csv, records)?;
    let progress = TrainProgress {
        episodes_done: records.len(),
        run: run.clone(),
        metrics_csv: String::from_utf8(csv).expect("CSV is UTF-8"),
    };
    let meta = toml::to_string(&progress).map_err(|e| Error::Checkpoint(e.to_string()))?;
    write_checkpoint(
        path,
        &Checkpoint {
            meta,
            agents: agents.to_vec(),
        },
    )
}

/// Trains one agent per UAV for `run.episodes` episodes.
///
/// Writes `checkpoint.bin` every `checkpoint_interval` episodes and at the
/// end, plus `metrics.csv`, `latency.csv` and `manifest.toml` in `out_dir`.
/// With `resume`, training continues from the checkpoint's episode count;
/// the checkpoint must come from a run with the same configuration apart
/// from `episodes` and `checkpoint_interval`. A diverged update aborts the
/// run and leaves the last checkpoint untouched.
pub fn train(run: &RunConfig, out_dir: &Path, resume: Option<&Path>) -> Result<TrainOutcome> {
    run.validate()?;
    ensure_dir(out_dir)?;
    let ckpt_path = out_dir.join("checkpoint.bin");

    let (mut agents, mut records) = match resume {
        Some(path) => {
            let ckpt = read_checkpoint(path)?;
            let progress = TrainProgress::from_checkpoint(&ckpt)?;
            let comparable = RunConfig {
                episodes: run.episodes,
                checkpoint_interval: run.checkpoint_interval,
                ..progress.run.clone()
            };
            if comparable != *run {
                return Err(Error::Checkpoint(
                    "checkpoint was produced by a different run configuration".into(),
                ));
            }
            let records = progress.records()?;
            if records.len() != progress.episodes_done || ckpt.agents.len() != run.scenario.n_uavs {
                return Err(Error::Checkpoint("inconsistent training progress".into()));
            }
            (ckpt.agents, records)
        }
        None => (init_agents(run)?, Vec::new()),
    };

    let mut latency = Vec::new();
    for episode in records.len()..run.episodes {
        let mut ctl = Controller::Policy {
            agents: &mut agents,
            explore: true,
            learn: true,
        };
        let log = run_episode(run, episode, run.episode_seed(episode), &mut ctl, LogOptions::default())?;
        let lat = Summary::of(log.decision_seconds.iter().copied());
        latency.push(LatencyRow {
            episode,
            decisions: lat.n,
            reaction_time_mean: lat.mean,
            reaction_time_std: lat.std,
        });
        log::debug!(
            "episode {episode}: {} after {} steps, swarming return {:.3}",
            log.record.outcome,
            log.record.steps,
            log.record.return_swarming
        );
        records.push(log.record);

        let done = episode + 1;
        if done % 50 == 0 {
            let tail = &records[done.saturating_sub(50)..];
            log::info!(
                "episode {done}/{}: mean swarming return {:.2}, success {:.0}%",
                run.episodes,
                tail.iter().map(|r| r.return_swarming).sum::<f64>() / tail.len() as f64,
                100.0 * tail.iter().filter(|r| r.success).count() as f64 / tail.len() as f64
            );
        }
        if run.checkpoint_interval > 0 && done % run.checkpoint_interval == 0 && done < run.episodes {
            save(&ckpt_path, run, &agents, &records)?;
        }
    }

    save(&ckpt_path, run, &agents, &records)?;
    write_metrics_csv(out_dir.join("metrics.csv"), &records)?;
    write_latency_csv(out_dir.join("latency.csv"), &latency)?;
    write_manifest(out_dir, "train", run, &["checkpoint.bin", "metrics.csv", "latency.csv"])?;
    Ok(TrainOutcome {
        agents,
        records,
        latency,
        checkpoint: ckpt_path,
    })
}
