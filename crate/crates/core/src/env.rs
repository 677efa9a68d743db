//! Episodic multi-UAV simulator.
//!
//! UAVs spawn on a vertical line on the left of a `w x l` arena and fly at a
//! constant speed toward mirrored targets on the right; each control step
//! they may rotate their heading by at most pi/4. Obstacles spawn on the
//! right half and fly at constant velocity toward one of the UAVs. The
//! episode ends on the first collision (UAV-obstacle or UAV-UAV closer than
//! `d_col`), when every UAV has reached its target, or on timeout.
//!
//! Each UAV's pre-planned path is the straight line to its target; it is
//! re-planned from the UAV's position after every step, so the formation
//! term always measures alignment with the direct route to the target.
//!
//! A UAV that reaches its target is retired: it stops moving, takes no
//! further actions, and no longer takes part in collision checks.

mod config;
mod observe;
mod state;
mod trajectory_log;

pub use config::ScenarioConfig;
pub use observe::{observe, Observation, OBS_WIDTH};
pub use state::{Action, EpisodeState, ObstacleState, StepResult, TerminationReason, UavState};
pub use trajectory_log::{write_trajectory_csv, TrajectoryRow, TRAJECTORY_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pso::PsoParams;
use crate::reward;
use crate::{Error, Result, Vec2};

const MAX_SPAWN_ATTEMPTS: usize = 100;

/// Episode driver: owns the configuration and the mutable state.
#[derive(Debug, Clone)]
pub struct Env {
    config: ScenarioConfig,
    state: EpisodeState,
    /// Apply the PSO separation repair when scoring rewards.
    pub training: bool,
    pub repair_params: PsoParams,
}

impl Env {
    /// Starts an episode seeded with `config.seed`.
    pub fn new(config: ScenarioConfig) -> Result<(Self, Vec<Observation>)> {
        let state = reset(&config)?;
        let obs = observe_all(&state, &config);
        Ok((
            Self {
                config,
                state,
                training: false,
                repair_params: PsoParams::default(),
            },
            obs,
        ))
    }

    /// Restarts with a different episode seed, keeping everything else.
    pub fn reset_with_seed(&mut self, seed: u64) -> Result<Vec<Observation>> {
        self.config.seed = seed;
        self.state = reset(&self.config)?;
        Ok(observe_all(&self.state, &self.config))
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn step(&mut self, actions: &[Action]) -> Result<StepResult> {
        let mut repair = self.training.then(|| self.repair_params.clone());
        if let Some(p) = repair.as_mut() {
            p.seed = self
                .config
                .seed
                .wrapping_mul(0x9e37_79b9)
                .wrapping_add(self.state.step as u64);
        }
        step(&mut self.state, &self.config, actions, repair.as_ref())
    }

    pub fn observe(&self, uav: usize) -> Observation {
        observe(&self.state, &self.config, uav)
    }
}

pub fn observe_all(state: &EpisodeState, config: &ScenarioConfig) -> Vec<Observation> {
    (0..state.uavs.len()).map(|i| observe(state, config, i)).collect()
}

/// Builds the initial state for `config.seed`.
pub fn reset(config: &ScenarioConfig) -> Result<EpisodeState> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w = config.arena_width;
    let l = config.arena_length;
    let n = config.n_uavs;
    let v_s = config.uav_speed;

    let uavs: Vec<UavState> = (0..n)
        .map(|i| {
            let y = l * (i + 1) as f64 / (n + 1) as f64;
            let spawn = Vec2::new(0.1 * w, y);
            let target = Vec2::new(0.9 * w, y);
            UavState::new(spawn, target, 0.0, v_s)
        })
        .collect();

    for _ in 0..MAX_SPAWN_ATTEMPTS {
        let obstacles: Vec<ObstacleState> = (0..config.n_obstacles)
            .map(|_| {
                let p = Vec2::new(rng.gen_range(0.5 * w..=0.9 * w), rng.gen_range(0.1 * l..=0.9 * l));
                let aim = uavs[rng.gen_range(0..n)].position;
                let [lo, hi] = config.obstacle_speed;
                let speed = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
                let dir = (aim - p).try_normalize(0.0).unwrap_or_else(|| Vec2::new(-1.0, 0.0));
                ObstacleState {
                    position: p,
                    velocity: dir * speed,
                }
            })
            .collect();

        let state = EpisodeState::new(uavs.clone(), obstacles, config);
        if state.min_uav_uav() >= config.d_col && state.min_uav_obstacle() >= config.d_col {
            return Ok(state);
        }
    }
    Err(Error::InfeasibleSpawn {
        attempts: MAX_SPAWN_ATTEMPTS,
    })
}

/// Advances the episode by one control step.
///
/// `actions` holds one entry per UAV; entries for retired UAVs are ignored.
/// With `repair` set, rewards are scored on PSO-separated positions whenever
/// the UAVs are closer than `d_bar_u2u`.
pub fn step(
    state: &mut EpisodeState,
    config: &ScenarioConfig,
    actions: &[Action],
    repair: Option<&PsoParams>,
) -> Result<StepResult> {
    if state.done {
        return Err(Error::EpisodeDone);
    }
    if actions.len() != state.uavs.len() {
        return Err(Error::ActionCount {
            expected: state.uavs.len(),
            got: actions.len(),
        });
    }
    let acting: Vec<bool> = state.uavs.iter().map(|u| !u.arrived).collect();
    let dt = config.dt;

    for (uav, action) in state.uavs.iter_mut().zip(actions) {
        if uav.arrived {
            continue;
        }
        let delta = action.clamped().heading_delta;
        uav.heading = wrap_angle(uav.heading + delta);
        uav.position += uav.velocity(config.uav_speed) * dt;
        uav.path.push(uav.position);
    }
    for obs in state.obstacles.iter_mut() {
        obs.position += obs.velocity * dt;
    }
    state.virtual_center += state.virtual_center_velocity * dt;
    state.step += 1;

    let mut collided = vec![false; state.uavs.len()];
    let mut min_u2o = f64::INFINITY;
    let mut min_u2u = f64::INFINITY;
    for i in 0..state.uavs.len() {
        if !acting[i] {
            continue;
        }
        let p = state.uavs[i].position;
        for o in &state.obstacles {
            let d = (p - o.position).norm();
            min_u2o = min_u2o.min(d);
            if d < config.d_col {
                collided[i] = true;
            }
        }
        for j in i + 1..state.uavs.len() {
            if !acting[j] {
                continue;
            }
            let d = (p - state.uavs[j].position).norm();
            min_u2u = min_u2u.min(d);
            if d < config.d_col {
                collided[i] = true;
                collided[j] = true;
            }
        }
    }

    let rewards = reward::step_rewards(state, config, &acting, &collided, repair)?;
    for (uav, &a) in state.uavs.iter_mut().zip(&acting) {
        if a {
            uav.replan(config.uav_speed);
        }
    }

    let mut reason = None;
    if collided.iter().any(|&c| c) {
        reason = Some(TerminationReason::Collision);
    } else {
        for (uav, &a) in state.uavs.iter_mut().zip(&acting) {
            if a && (uav.position - uav.target).norm() <= config.d_col {
                uav.arrived = true;
            }
        }
        if state.uavs.iter().all(|u| u.arrived) {
            reason = Some(TerminationReason::Success);
        } else if state.step >= config.max_steps {
            reason = Some(TerminationReason::Timeout);
        }
    }
    state.done = reason.is_some();
    state.reason = reason;

    let observations = observe_all(state, config);
    Ok(StepResult {
        rewards: rewards.iter().map(|r| r.map_or(0.0, |b| b.total)).collect(),
        breakdowns: rewards,
        observations,
        done: state.done,
        reason,
        min_d_u2o: min_u2o,
        min_d_u2u: min_u2u,
        collisions: collided,
        acted: acting,
    })
}

fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}
