use std::path::Path;

use serde::{Deserialize, Serialize};

use super::export::write_manifest;
use super::metrics::{write_latency_csv, write_metrics_csv, write_q_csv, LatencyRow, MetricsRecord, Summary};
use super::rollout::{run_episode, Controller, EpisodeLog, LogOptions};
use super::{ensure_dir, RunConfig};
use crate::agent::DdpgAgent;
use crate::env::write_trajectory_csv;
use crate::{Error, Result};

/// Reaction time, energy, separation and success aggregated over a set of episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub success_rate: f64,
    /// Over every individual decision, seconds.
    pub reaction_time: Summary,
    /// Over episodes of the per-episode mean UAV energy.
    pub energy: Summary,
    /// Over episodes of the per-episode minimum.
    pub min_d_u2o: Summary,
    pub min_d_u2u: Summary,
    /// Fraction of episodes whose minimum stayed at or above `d_col`.
    pub safe_u2o: f64,
    pub safe_u2u: f64,
    #[serde(skip)]
    pub records: Vec<MetricsRecord>,
}

impl EvalReport {
    pub fn from_logs(logs: &[EpisodeLog], d_col: f64) -> Self {
        let records: Vec<MetricsRecord> = logs.iter().map(|l| l.record.clone()).collect();
        let n = records.len().max(1) as f64;
        let frac = |f: &dyn Fn(&MetricsRecord) -> bool| records.iter().filter(|r| f(r)).count() as f64 / n;
        Self {
            episodes: records.len(),
            success_rate: frac(&|r| r.success),
            reaction_time: Summary::of(logs.iter().flat_map(|l| l.decision_seconds.iter().copied())),
            energy: Summary::of(records.iter().map(MetricsRecord::energy_mean)),
            min_d_u2o: Summary::of(records.iter().map(|r| r.min_d_u2o)),
            min_d_u2u: Summary::of(records.iter().map(|r| r.min_d_u2u)),
            safe_u2o: frac(&|r| r.min_d_u2o >= d_col),
            safe_u2u: frac(&|r| r.min_d_u2u >= d_col),
            records,
        }
    }
}

pub(crate) fn check_agents(run: &RunConfig, agents: &[DdpgAgent]) -> Result<()> {
    let want = run.scenario.obs_dim();
    if agents.len() != run.scenario.n_uavs || agents.iter().any(|a| a.obs_dim() != want) {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint holds {} agents with inputs {:?}; scenario needs {} with input {}",
            agents.len(),
            agents.iter().map(DdpgAgent::obs_dim).collect::<Vec<_>>(),
            run.scenario.n_uavs,
            want
        )));
    }
    Ok(())
}

pub(crate) fn latency_rows(logs: &[EpisodeLog]) -> Vec<LatencyRow> {
    logs.iter()
        .map(|l| {
            let s = Summary::of(l.decision_seconds.iter().copied());
            LatencyRow {
                episode: l.record.episode,
                decisions: s.n,
                reaction_time_mean: s.mean,
                reaction_time_std: s.std,
            }
        })
        .collect()
}

/// Noise-free rollouts of `agents` on the evaluation seeds.
///
/// With `out_dir` set, writes `eval_metrics.csv`, `trajectories.csv`,
/// `qvalues.csv`, `eval_latency.csv`, `eval_summary.toml` and
/// `manifest.toml`. The agents are not modified.
pub fn evaluate(run: &RunConfig, agents: &[DdpgAgent], episodes: usize, out_dir: Option<&Path>) -> Result<EvalReport> {
    run.validate()?;
    check_agents(run, agents)?;
    let mut agents = agents.to_vec();
    let opts = LogOptions {
        trajectory: out_dir.is_some(),
        q_values: out_dir.is_some(),
    };
    let mut logs = Vec::with_capacity(episodes);
    for k in 0..episodes {
        let mut ctl = Controller::Policy {
            agents: &mut agents,
            explore: false,
            learn: false,
        };
        logs.push(run_episode(run, k, run.eval_seed(k), &mut ctl, opts)?);
    }
    let report = EvalReport::from_logs(&logs, run.scenario.d_col);

    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_metrics_csv(dir.join("eval_metrics.csv"), &report.records)?;
        let traj: Vec<_> = logs.iter().flat_map(|l| l.trajectory.iter().cloned()).collect();
        let path = dir.join("trajectories.csv");
        let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_trajectory_csv(f, &traj)?;
        let q: Vec<_> = logs.iter().flat_map(|l| l.q_rows.iter().cloned()).collect();
        write_q_csv(dir.join("qvalues.csv"), &q)?;
        write_latency_csv(dir.join("eval_latency.csv"), &latency_rows(&logs))?;
        let summary = toml::to_string(&report).map_err(|e| Error::Config(e.to_string()))?;
        let path = dir.join("eval_summary.toml");
        std::fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
        write_manifest(
            dir,
            "eval",
            run,
            &[
                "eval_metrics.csv",
                "trajectories.csv",
                "qvalues.csv",
                "eval_latency.csv",
                "eval_summary.toml",
            ],
        )?;
    }
    Ok(report)
}
