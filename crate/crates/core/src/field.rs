//! Repulsive potential field built from obstacles and the swarm virtual center.
//!
//! Each obstacle contributes a field that is flat at its maximum inside the
//! safe distance, decays with the inverse square of distance out to its
//! influence radius, and vanishes beyond it. The swarm is a single source at
//! the virtual center with the same inverse-square decay. Obstacles and the
//! virtual center therefore sit on peaks, and the steepest edge around an
//! obstacle lies on the ring at the safe distance.
//!
//! Branch conventions at exact boundaries:
//!
//! - intensity uses the closed inner interval, `r <= d_safe` is the plateau;
//! - the gradient uses the closed middle interval `d_safe <= r <= R`, so a
//!   query exactly on the safe ring or on the influence radius returns the
//!   decaying-branch value.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Below this distance from the virtual center the swarm field is clamped to
/// its value at this radius.
pub const SWARM_CORE_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Influence radius `R_o`.
    pub influence_radius: f64,
    /// Minimum safe distance `d_safe`.
    pub safe_distance: f64,
}

impl ObstacleSpec {
    pub fn new(position: Vec2, velocity: Vec2, influence_radius: f64, safe_distance: f64) -> Result<Self> {
        let spec = Self {
            position,
            velocity,
            influence_radius,
            safe_distance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.safe_distance > 0.0 && self.safe_distance < self.influence_radius) {
            return Err(Error::InvalidParameter(format!(
                "obstacle needs 0 < d_safe < R_o, got d_safe={} R_o={}",
                self.safe_distance, self.influence_radius
            )));
        }
        if !(self.position.iter().chain(self.velocity.iter())).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("obstacle state".into()));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmFieldSpec {
    /// Virtual center `p*`.
    pub center: Vec2,
    /// Swarm speed `v_s`.
    pub speed: f64,
    /// Influence radius `R_s`.
    pub influence_radius: f64,
}

impl SwarmFieldSpec {
    pub fn new(center: Vec2, speed: f64, influence_radius: f64) -> Result<Self> {
        let spec = Self {
            center,
            speed,
            influence_radius,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0 && self.influence_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "swarm field needs v_s > 0 and R_s > 0, got v_s={} R_s={}",
                self.speed, self.influence_radius
            )));
        }
        if !self.center.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("virtual center".into()));
        }
        Ok(())
    }
}

/// Superposition of one swarm field and any number of obstacle fields.
///
/// `gain` scales the whole field. With `gain == 1` the intensities are the
/// bare inverse-square expressions; the environment uses a larger gain so the
/// gradient term of the contour cost is on the same scale as the smoothness
/// term when lengths are in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    obstacles: Vec<ObstacleSpec>,
    swarm: SwarmFieldSpec,
    gain: f64,
}

impl PotentialField {
    pub fn new(obstacles: Vec<ObstacleSpec>, swarm: SwarmFieldSpec) -> Result<Self> {
        for o in &obstacles {
            o.validate()?;
        }
        swarm.validate()?;
        Ok(Self {
            obstacles,
            swarm,
            gain: 1.0,
        })
    }

    pub fn with_gain(mut self, gain: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::InvalidParameter(format!("field gain {gain}")));
        }
        self.gain = gain;
        Ok(self)
    }

    pub fn obstacles(&self) -> &[ObstacleSpec] {
        &self.obstacles
    }

    pub fn swarm(&self) -> &SwarmFieldSpec {
        &self.swarm
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn intensity(&self, q: Vec2) -> f64 {
        phi_total(q, self)
    }

    pub fn gradient(&self, q: Vec2) -> Vec2 {
        grad_phi(q, self)
    }
}

/// Intensity of one obstacle's field at `q` (unit gain).
pub fn phi_obstacle(q: Vec2, obs: &ObstacleSpec, swarm_speed: f64) -> f64 {
    let strength = obs.speed().max(swarm_speed);
    let r = (q - obs.position).norm();
    if r <= obs.safe_distance {
        strength / (obs.safe_distance * obs.safe_distance)
    } else if r <= obs.influence_radius {
        strength / (r * r)
    } else {
        0.0
    }
}

/// Gradient of [`phi_obstacle`] with respect to `q` (unit gain).
pub fn grad_obstacle(q: Vec2, obs: &ObstacleSpec, swarm_speed: f64) -> Vec2 {
    let d = q - obs.position;
    let r2 = d.norm_squared();
    let r = r2.sqrt();
    if r < obs.safe_distance || r > obs.influence_radius {
        return Vec2::zeros();
    }
    let strength = obs.speed().max(swarm_speed);
    d * (-2.0 * strength / (r2 * r2))
}

/// Intensity of the swarm field at `q` (unit gain), clamped inside
/// [`SWARM_CORE_RADIUS`].
pub fn phi_swarm(q: Vec2, spec: &SwarmFieldSpec) -> f64 {
    let r = (q - spec.center).norm();
    if r > spec.influence_radius {
        0.0
    } else if r < SWARM_CORE_RADIUS {
        spec.speed / (SWARM_CORE_RADIUS * SWARM_CORE_RADIUS)
    } else {
        spec.speed / (r * r)
    }
}

pub fn grad_swarm(q: Vec2, spec: &SwarmFieldSpec) -> Vec2 {
    let d = q - spec.center;
    let r2 = d.norm_squared();
    let r = r2.sqrt();
    if r > spec.influence_radius || r < SWARM_CORE_RADIUS {
        return Vec2::zeros();
    }
    d * (-2.0 * spec.speed / (r2 * r2))
}

pub fn phi_total(q: Vec2, field: &PotentialField) -> f64 {
    let v_s = field.swarm.speed;
    let sum = phi_swarm(q, &field.swarm) + field.obstacles.iter().map(|o| phi_obstacle(q, o, v_s)).sum::<f64>();
    field.gain * sum
}

pub fn grad_phi(q: Vec2, field: &PotentialField) -> Vec2 {
    let v_s = field.swarm.speed;
    let sum = field
        .obstacles
        .iter()
        .fold(grad_swarm(q, &field.swarm), |acc, o| acc + grad_obstacle(q, o, v_s));
    sum * field.gain
}
