use std::path::Path;

use serde::{Deserialize, Serialize};

use super::evaluate::{check_agents, latency_rows, EvalReport};
use super::export::write_manifest;
use super::metrics::{write_latency_csv, write_metrics_csv, write_serialized};
use super::rollout::{run_episode, Controller, LogOptions};
use super::{ensure_dir, RunConfig};
use crate::agent::DdpgAgent;
use crate::baseline::write_timing_csv;
use crate::Result;

pub const BENCH_HEADER: [&str; 12] = [
    "method",
    "seed",
    "episodes",
    "reaction_time_mean",
    "reaction_time_std",
    "energy_mean",
    "energy_std",
    "min_d_u2o",
    "min_d_u2u",
    "success_rate",
    "safe_u2o",
    "safe_u2u",
];

/// A row of the comparison table. The improvement row only fills the four
/// columns reaction time, energy and the two minimum distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub seed: u64,
    pub episodes: usize,
    pub reaction_time_mean: f64,
    pub reaction_time_std: Option<f64>,
    pub energy_mean: f64,
    pub energy_std: Option<f64>,
    pub min_d_u2o: f64,
    pub min_d_u2u: f64,
    pub success_rate: Option<f64>,
    pub safe_u2o: Option<f64>,
    pub safe_u2u: Option<f64>,
}

impl BenchRow {
    fn from_report(method: &str, seed: u64, r: &EvalReport) -> Self {
        Self {
            method: method.into(),
            seed,
            episodes: r.episodes,
            reaction_time_mean: r.reaction_time.mean,
            reaction_time_std: Some(r.reaction_time.std),
            energy_mean: r.energy.mean,
            energy_std: Some(r.energy.std),
            min_d_u2o: r.min_d_u2o.mean,
            min_d_u2u: r.min_d_u2u.mean,
            success_rate: Some(r.success_rate),
            safe_u2o: Some(r.safe_u2o),
            safe_u2u: Some(r.safe_u2u),
        }
    }
}

/// Relative reduction of `policy` with respect to `baseline`, in percent.
pub fn improvement_pct(baseline: f64, policy: f64) -> f64 {
    (baseline - policy) / baseline * 100.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub policy: EvalReport,
    pub baseline: EvalReport,
    /// Baseline, policy, improvement.
    pub rows: [BenchRow; 3],
}

/// Runs the trained policy and the PSO planner on the same evaluation seeds.
///
/// With `out_dir` set, writes `bench.csv` (baseline, policy and improvement
/// rows), per-episode metrics and latencies for both methods,
/// `baseline_timing.csv` and `manifest.toml`.
pub fn bench(run: &RunConfig, agents: &[DdpgAgent], episodes: usize, out_dir: Option<&Path>) -> Result<BenchReport> {
    run.validate()?;
    check_agents(run, agents)?;
    let mut agents = agents.to_vec();
    let opts = LogOptions::default();
    let d_col = run.scenario.d_col;

    let mut policy_logs = Vec::with_capacity(episodes);
    let mut baseline_logs = Vec::with_capacity(episodes);
    for k in 0..episodes {
        let seed = run.eval_seed(k);
        let mut ctl = Controller::Policy {
            agents: &mut agents,
            explore: false,
            learn: false,
        };
        policy_logs.push(run_episode(run, k, seed, &mut ctl, opts)?);
        let mut ctl = Controller::Baseline { params: &run.baseline };
        baseline_logs.push(run_episode(run, k, seed, &mut ctl, opts)?);
        log::info!(
            "bench episode {k}: policy {} / baseline {}",
            policy_logs[k].record.outcome,
            baseline_logs[k].record.outcome
        );
    }
    let policy = EvalReport::from_logs(&policy_logs, d_col);
    let baseline = EvalReport::from_logs(&baseline_logs, d_col);
    let b = BenchRow::from_report("baseline", run.seed, &baseline);
    let p = BenchRow::from_report("policy", run.seed, &policy);
    let imp = BenchRow {
        method: "improvement_pct".into(),
        seed: run.seed,
        episodes,
        reaction_time_mean: improvement_pct(b.reaction_time_mean, p.reaction_time_mean),
        reaction_time_std: None,
        energy_mean: improvement_pct(b.energy_mean, p.energy_mean),
        energy_std: None,
        min_d_u2o: improvement_pct(b.min_d_u2o, p.min_d_u2o),
        min_d_u2u: improvement_pct(b.min_d_u2u, p.min_d_u2u),
        success_rate: None,
        safe_u2o: None,
        safe_u2u: None,
    };
    let report = BenchReport {
        policy,
        baseline,
        rows: [b, p, imp],
    };

    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_serialized(&dir.join("bench.csv"), &BENCH_HEADER, &report.rows)?;
        write_metrics_csv(dir.join("bench_policy_metrics.csv"), &report.policy.records)?;
        write_metrics_csv(dir.join("bench_baseline_metrics.csv"), &report.baseline.records)?;
        write_latency_csv(dir.join("bench_policy_latency.csv"), &latency_rows(&policy_logs))?;
        write_latency_csv(dir.join("bench_baseline_latency.csv"), &latency_rows(&baseline_logs))?;
        let timing: Vec<_> = baseline_logs.iter().flat_map(|l| l.timing.iter().cloned()).collect();
        write_timing_csv(dir.join("baseline_timing.csv"), &timing)?;
        write_manifest(
            dir,
            "bench",
            run,
            &[
                "bench.csv",
                "bench_policy_metrics.csv",
                "bench_baseline_metrics.csv",
                "bench_policy_latency.csv",
                "bench_baseline_latency.csv",
                "baseline_timing.csv",
            ],
        )?;
    }
    Ok(report)
}
