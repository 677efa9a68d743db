//! Per-UAV reward: a contour term plus a swarming term.
//!
//! `r = -f(S, phi) + r_form * r_collide`, where `f` is the contour cost of
//! the UAV's recent trajectory on the field built from the full episode
//! state, `r_form` is the cosine between the actual and pre-planned
//! velocities, and `r_collide` is zero on a collision step and one otherwise.

use serde::{Deserialize, Serialize};

use crate::env::{EpisodeState, ScenarioConfig};
use crate::field::{ObstacleSpec, PotentialField, SwarmFieldSpec};
use crate::pso::{adjust_uav_positions, min_pairwise_distance, PsoParams};
use crate::trajectory::Trajectory;
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Negated contour cost.
    pub contour: f64,
    /// `r_form`, in `[-1, 1]`.
    pub formation: f64,
    /// `r_collide`, 0 or 1.
    pub collide: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn new(contour: f64, formation: f64, collide: f64) -> Self {
        Self {
            contour,
            formation,
            collide,
            total: contour + formation * collide,
        }
    }

    pub fn swarming(&self) -> f64 {
        self.formation * self.collide
    }
}

/// Field of every obstacle plus the swarm's virtual center, from global state.
pub fn build_field(state: &EpisodeState, config: &ScenarioConfig) -> Result<PotentialField> {
    let obstacles = state
        .obstacles
        .iter()
        .map(|o| ObstacleSpec::new(o.position, o.velocity, config.obstacle_radius, config.d_safe))
        .collect::<Result<Vec<_>>>()?;
    let swarm = SwarmFieldSpec::new(state.virtual_center, config.uav_speed, config.swarm_radius)?;
    PotentialField::new(obstacles, swarm)?.with_gain(config.field_gain)
}

/// Cosine similarity between the actual and pre-planned velocity.
pub fn formation_reward(v: Vec2, v_bar: Vec2) -> Result<f64> {
    let n = v.norm() * v_bar.norm();
    if !(n > 0.0) {
        return Err(Error::ZeroVelocity);
    }
    Ok((v.dot(&v_bar) / n).clamp(-1.0, 1.0))
}

/// 0 when the UAV is closer than `d_col` to any obstacle or other active UAV.
pub fn collision_indicator(state: &EpisodeState, uav_index: usize, d_col: f64) -> f64 {
    let p = state.uavs[uav_index].position;
    let hit_obstacle = state.obstacles.iter().any(|o| (p - o.position).norm() < d_col);
    let hit_uav = state
        .active()
        .any(|(j, u)| j != uav_index && (p - u.position).norm() < d_col);
    if hit_obstacle || hit_uav {
        0.0
    } else {
        1.0
    }
}

/// Reward for one UAV scored on its unmodified trajectory.
pub fn compute_reward(state: &EpisodeState, uav_index: usize, config: &ScenarioConfig) -> Result<RewardBreakdown> {
    let field = build_field(state, config)?;
    reward_on_field(state, uav_index, config, &field, None)
}

/// Reward for one UAV; `endpoint` replaces the newest trajectory point when
/// the separation repair moved it.
pub fn reward_on_field(
    state: &EpisodeState,
    uav_index: usize,
    config: &ScenarioConfig,
    field: &PotentialField,
    endpoint: Option<Vec2>,
) -> Result<RewardBreakdown> {
    let uav = &state.uavs[uav_index];
    let history = uav.history(config.history_steps);
    if history.len() < 3 {
        return Err(Error::TooFewWaypoints {
            needed: 3,
            got: history.len(),
        });
    }
    let mut points = history.to_vec();
    if let Some(e) = endpoint {
        *points.last_mut().expect("non-empty history") = e;
    }
    let traj = Trajectory::resample_uniform(&points, config.trajectory_ds())?;
    let contour = -traj.contour_cost(field)?;
    let formation = formation_reward(uav.velocity(config.uav_speed), uav.planned_velocity)?;
    let collide = collision_indicator(state, uav_index, config.d_col);
    Ok(RewardBreakdown::new(contour, formation, collide))
}

/// Rewards for every UAV after a step; `None` for UAVs that did not act.
///
/// During the warm-up steps the contour term is zero. With `repair` set and
/// two acting UAVs closer than `d_bar_u2u`, the newest trajectory points are
/// first moved by the PSO separation repair; if the repair finds no feasible
/// configuration its best candidate is used.
pub fn step_rewards(
    state: &EpisodeState,
    config: &ScenarioConfig,
    acting: &[bool],
    collided: &[bool],
    repair: Option<&PsoParams>,
) -> Result<Vec<Option<RewardBreakdown>>> {
    let field = build_field(state, config)?;
    let warmup = state.step <= config.warmup_steps;

    let acting_idx: Vec<usize> = (0..state.uavs.len()).filter(|&i| acting[i]).collect();
    let mut endpoints: Vec<Option<Vec2>> = vec![None; state.uavs.len()];
    if let (Some(params), false) = (repair, warmup) {
        let pts: Vec<Vec2> = acting_idx.iter().map(|&i| state.uavs[i].position).collect();
        if pts.len() >= 2 && min_pairwise_distance(&pts) < config.d_bar_u2u {
            let adjusted = match adjust_uav_positions(&pts, &field, config.d_bar_u2u, params) {
                Ok(a) => a.positions,
                Err(Error::Infeasible { best, .. }) => {
                    log::debug!("separation repair infeasible at step {}", state.step);
                    best
                }
                Err(e) => return Err(e),
            };
            for (&i, p) in acting_idx.iter().zip(adjusted) {
                endpoints[i] = Some(p);
            }
        }
    }

    let mut out = vec![None; state.uavs.len()];
    for &i in &acting_idx {
        let uav = &state.uavs[i];
        let collide = if collided[i] { 0.0 } else { 1.0 };
        let b = if warmup {
            let formation = formation_reward(uav.velocity(config.uav_speed), uav.planned_velocity)?;
            RewardBreakdown::new(0.0, formation, collide)
        } else {
            let b = reward_on_field(state, i, config, &field, endpoints[i])?;
            debug_assert_eq!(b.collide, collide);
            b
        };
        if !b.total.is_finite() {
            return Err(Error::NonFinite(format!("reward of UAV {i}")));
        }
        out[i] = Some(b);
    }
    Ok(out)
}
