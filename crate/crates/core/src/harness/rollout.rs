use std::time::Instant;

use super::metrics::{MetricsRecord, QRow};
use super::{derive_seed, RunConfig};
use crate::agent::{DdpgAgent, Transition};
use crate::baseline::{plan_step, predicted_field, TimingRow};
use crate::env::{observe_all, reset, step, Action, TerminationReason, TrajectoryRow};
use crate::pso::PsoParams;
use crate::trajectory::Trajectory;
use crate::{Error, Result};

const STREAM_REPAIR: u64 = 7;
const STREAM_PLANNER: u64 = 8;

/// Who chooses the actions during an episode.
pub enum Controller<'a> {
    /// One agent per UAV. `explore` adds exploration noise; `learn` stores
    /// transitions, runs updates and decays the noise at the end.
    Policy {
        agents: &'a mut [DdpgAgent],
        explore: bool,
        learn: bool,
    },
    Baseline {
        params: &'a PsoParams,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LogOptions {
    pub trajectory: bool,
    pub q_values: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub record: MetricsRecord,
    /// Wall time of every decision, seconds.
    pub decision_seconds: Vec<f64>,
    pub trajectory: Vec<TrajectoryRow>,
    pub q_rows: Vec<QRow>,
    pub timing: Vec<TimingRow>,
    pub updates: usize,
}

fn path_energy(path: &[crate::Vec2], ds: f64) -> f64 {
    Trajectory::resample_uniform(path, ds)
        .and_then(|t| t.energy())
        .unwrap_or(0.0)
}

/// Runs one episode of `run.scenario` seeded with `seed`.
pub fn run_episode(
    run: &RunConfig,
    episode: usize,
    seed: u64,
    controller: &mut Controller,
    opts: LogOptions,
) -> Result<EpisodeLog> {
    let mut cfg = run.scenario.clone();
    cfg.seed = seed;
    let mut state = reset(&cfg)?;
    let mut obs = observe_all(&state, &cfg);
    let n = cfg.n_uavs;

    if let Controller::Policy { agents, .. } = controller {
        if agents.len() != n {
            return Err(Error::ShapeMismatch(format!("{} agents for {} UAVs", agents.len(), n)));
        }
    }
    let learning = matches!(controller, Controller::Policy { learn: true, .. });

    let mut log = EpisodeLog {
        record: MetricsRecord {
            episode,
            seed,
            steps: 0,
            outcome: String::new(),
            success: false,
            return_total: 0.0,
            return_swarming: 0.0,
            min_d_u2o: f64::INFINITY,
            min_d_u2u: f64::INFINITY,
            energies: Vec::new(),
        },
        decision_seconds: Vec::new(),
        trajectory: Vec::new(),
        q_rows: Vec::new(),
        timing: Vec::new(),
        updates: 0,
    };
    let mut sum_total = vec![0.0; n];
    let mut sum_swarm = vec![0.0; n];

    while !state.done {
        if opts.trajectory {
            log.trajectory.extend(TrajectoryRow::snapshot(episode, &state));
        }
        let mut actions = vec![Action::new(0.0); n];
        let mut encoded: Vec<Option<Vec<f64>>> = vec![None; n];
        match controller {
            Controller::Policy { agents, explore, .. } => {
                for (i, u) in state.uavs.iter().enumerate() {
                    if u.arrived {
                        continue;
                    }
                    let t0 = Instant::now();
                    let x = agents[i].encode(&obs[i])?;
                    let a = agents[i].act_encoded(&x, *explore)?;
                    log.decision_seconds.push(t0.elapsed().as_secs_f64());
                    if opts.q_values {
                        log.q_rows.push(QRow {
                            episode,
                            step: state.step,
                            uav: i,
                            action: a.heading_delta,
                            q: agents[i].value.q(&x, a.heading_delta),
                        });
                    }
                    actions[i] = a;
                    encoded[i] = Some(x);
                }
            }
            Controller::Baseline { params } => {
                let field = predicted_field(&state, &cfg)?;
                let mut p = (*params).clone();
                p.seed = derive_seed(seed ^ params.seed, STREAM_PLANNER, state.step as u64);
                let plan = plan_step(&state, &cfg, &field, &p)?;
                log.decision_seconds.push(plan.plan_seconds);
                for (i, u) in state.uavs.iter().enumerate() {
                    if !u.arrived {
                        log.timing.push(TimingRow {
                            step: state.step,
                            uav: i,
                            plan_ms: plan.plan_seconds * 1e3,
                        });
                    }
                }
                actions = plan.actions;
            }
        }

        let repair = (learning && run.training_repair).then(|| {
            let mut p = run.repair.clone();
            p.seed = derive_seed(seed ^ run.repair.seed, STREAM_REPAIR, state.step as u64);
            p
        });
        let result = step(&mut state, &cfg, &actions, repair.as_ref())?;
        log.record.min_d_u2o = log.record.min_d_u2o.min(result.min_d_u2o);
        log.record.min_d_u2u = log.record.min_d_u2u.min(result.min_d_u2u);
        for (i, b) in result.breakdowns.iter().enumerate() {
            if let Some(b) = b {
                sum_total[i] += b.total;
                sum_swarm[i] += b.swarming();
            }
        }

        if let Controller::Policy {
            agents, learn: true, ..
        } = controller
        {
            let terminal = matches!(
                result.reason,
                Some(TerminationReason::Collision) | Some(TerminationReason::Success)
            );
            for i in 0..n {
                let Some(x) = encoded[i].take() else { continue };
                let next = agents[i].encode(&result.observations[i])?;
                let t = Transition {
                    obs: x,
                    action: actions[i].heading_delta,
                    reward: result.rewards[i],
                    next_obs: next,
                    done: terminal || state.uavs[i].arrived,
                };
                match agents[i].observe_transition(t) {
                    Ok(Some(_)) => log.updates += 1,
                    Ok(None) => {}
                    Err(Error::NonFinite(what)) => {
                        return Err(Error::Diverged {
                            episode,
                            reason: format!("UAV {i}: non-finite {what}"),
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        obs = result.observations;
    }

    if opts.trajectory {
        log.trajectory.extend(TrajectoryRow::snapshot(episode, &state));
    }
    if let Controller::Policy {
        agents, learn: true, ..
    } = controller
    {
        for a in agents.iter_mut() {
            a.end_episode();
        }
    }

    let ds = cfg.trajectory_ds();
    let reason = state.reason.expect("finished episode has a reason");
    log.record.steps = state.step;
    log.record.outcome = reason.as_str().to_string();
    log.record.success = reason == TerminationReason::Success;
    log.record.return_total = sum_total.iter().sum::<f64>() / n as f64;
    log.record.return_swarming = sum_swarm.iter().sum::<f64>() / n as f64;
    log.record.energies = state.uavs.iter().map(|u| path_energy(&u.path, ds)).collect();
    Ok(log)
}
