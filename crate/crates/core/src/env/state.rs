use serde::{Deserialize, Serialize};

use super::{Observation, ScenarioConfig};
use crate::reward::RewardBreakdown;
use crate::{Vec2, MAX_HEADING_DELTA};

/// Heading change for one UAV, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub heading_delta: f64,
}

impl Action {
    pub fn new(heading_delta: f64) -> Self {
        Self { heading_delta }
    }

    /// Clamped into `[-pi/4, pi/4]`; NaN maps to no turn.
    pub fn clamped(self) -> Self {
        let d = if self.heading_delta.is_nan() {
            0.0
        } else {
            self.heading_delta.clamp(-MAX_HEADING_DELTA, MAX_HEADING_DELTA)
        };
        Self { heading_delta: d }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Vec2,
    /// Velocity direction, radians from +x.
    pub heading: f64,
    pub target: Vec2,
    pub spawn: Vec2,
    /// Pre-planned velocity: speed `v_s` along the straight line from the
    /// UAV's position at the start of the current step to its target.
    pub planned_velocity: Vec2,
    /// Every position since spawn, one per control step.
    pub path: Vec<Vec2>,
    pub arrived: bool,
}

impl UavState {
    pub fn new(spawn: Vec2, target: Vec2, heading: f64, speed: f64) -> Self {
        let dir = (target - spawn)
            .try_normalize(0.0)
            .unwrap_or_else(|| Vec2::new(heading.cos(), heading.sin()));
        Self {
            position: spawn,
            heading,
            target,
            spawn,
            planned_velocity: dir * speed,
            path: vec![spawn],
            arrived: false,
        }
    }

    /// Re-plans the straight path to the target from the current position.
    /// Keeps the previous plan when the UAV sits on its target.
    pub fn replan(&mut self, speed: f64) {
        if let Some(dir) = (self.target - self.position).try_normalize(0.0) {
            self.planned_velocity = dir * speed;
        }
    }

    pub fn velocity(&self, speed: f64) -> Vec2 {
        Vec2::new(self.heading.cos(), self.heading.sin()) * speed
    }

    /// Last `steps + 1` positions (fewer early in the episode).
    pub fn history(&self, steps: usize) -> &[Vec2] {
        let start = self.path.len().saturating_sub(steps + 1);
        &self.path[start..]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleState {
    pub position: Vec2,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Collision,
    Success,
    Timeout,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::Collision => "collision",
            TerminationReason::Success => "success",
            TerminationReason::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeState {
    pub uavs: Vec<UavState>,
    pub obstacles: Vec<ObstacleState>,
    pub virtual_center: Vec2,
    pub virtual_center_velocity: Vec2,
    pub uav_speed: f64,
    pub step: usize,
    pub done: bool,
    pub reason: Option<TerminationReason>,
}

impl EpisodeState {
    /// Places the virtual center `center_lead_steps * 2 * v_s * dt` ahead of
    /// the centroid along the mean initial heading.
    pub fn new(uavs: Vec<UavState>, obstacles: Vec<ObstacleState>, config: &ScenarioConfig) -> Self {
        let n = uavs.len() as f64;
        let centroid = uavs.iter().map(|u| u.position).sum::<Vec2>() / n;
        let mean_velocity = uavs.iter().map(|u| u.velocity(config.uav_speed)).sum::<Vec2>() / n;
        let dir = mean_velocity.try_normalize(0.0).unwrap_or_else(|| Vec2::new(1.0, 0.0));
        let lead = config.center_lead_steps as f64 * 2.0 * config.uav_speed * config.dt;
        Self {
            uavs,
            obstacles,
            virtual_center: centroid + dir * lead,
            virtual_center_velocity: mean_velocity,
            uav_speed: config.uav_speed,
            step: 0,
            done: false,
            reason: None,
        }
    }

    pub fn active(&self) -> impl Iterator<Item = (usize, &UavState)> {
        self.uavs.iter().enumerate().filter(|(_, u)| !u.arrived)
    }

    /// Smallest distance between two active UAVs.
    pub fn min_uav_uav(&self) -> f64 {
        let pts: Vec<Vec2> = self.active().map(|(_, u)| u.position).collect();
        crate::pso::min_pairwise_distance(&pts)
    }

    /// Smallest distance between an active UAV and an obstacle.
    pub fn min_uav_obstacle(&self) -> f64 {
        self.active()
            .flat_map(|(_, u)| self.obstacles.iter().map(move |o| (u.position - o.position).norm()))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observations: Vec<Observation>,
    /// Total reward per UAV; zero for UAVs that did not act this step.
    pub rewards: Vec<f64>,
    pub breakdowns: Vec<Option<RewardBreakdown>>,
    pub done: bool,
    pub reason: Option<TerminationReason>,
    /// Over UAVs that acted this step; `+inf` when no pair exists.
    pub min_d_u2o: f64,
    pub min_d_u2u: f64,
    pub collisions: Vec<bool>,
    /// Which UAVs were active (not yet arrived) at the start of the step.
    pub acted: Vec<bool>,
}
