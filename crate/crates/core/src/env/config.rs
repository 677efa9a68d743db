use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scenario description. Every field has a default, so a config file only
/// needs the keys it overrides.
///
/// Arena size, speeds, `dt`, sensing geometry, the field gain and the virtual
/// center lead are modelling choices of this crate rather than published
/// constants; `d_col = 20` is the collision threshold used for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_uavs: usize,
    pub n_obstacles: usize,
    /// Arena width `w` (x extent), meters.
    pub arena_width: f64,
    /// Arena length `l` (y extent), meters.
    pub arena_length: f64,
    /// Constant UAV speed `v_s`, m/s.
    pub uav_speed: f64,
    /// Obstacle speed range `[min, max]`, m/s.
    pub obstacle_speed: [f64; 2],
    /// Seconds per control step.
    pub dt: f64,
    /// Collision threshold, meters.
    pub d_col: f64,
    /// Obstacle safe distance, meters.
    pub d_safe: f64,
    /// Obstacle field influence radius `R_o`, meters.
    pub obstacle_radius: f64,
    /// Swarm field influence radius `R_s`, meters.
    pub swarm_radius: f64,
    /// Multiplier on the potential field.
    pub field_gain: f64,
    /// UAV-UAV separation enforced by the PSO repair, meters.
    pub d_bar_u2u: f64,
    pub sense_range: f64,
    /// Full sensor aperture, radians, centred on the heading.
    pub sense_aperture: f64,
    /// Obstacle rows in an observation; defaults to `n_obstacles`.
    pub max_obs: Option<usize>,
    pub max_steps: usize,
    /// Control steps of history scored by the contour reward.
    pub history_steps: usize,
    /// Steps of lead between the swarm centroid and the virtual center.
    pub center_lead_steps: usize,
    /// Steps at the start of an episode whose contour term is zero.
    pub warmup_steps: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_uavs: 2,
            n_obstacles: 1,
            arena_width: 800.0,
            arena_length: 800.0,
            uav_speed: 10.0,
            obstacle_speed: [3.0, 8.0],
            dt: 1.0,
            d_col: 20.0,
            d_safe: 40.0,
            obstacle_radius: 150.0,
            swarm_radius: 150.0,
            field_gain: 500.0,
            d_bar_u2u: 30.0,
            sense_range: 200.0,
            sense_aperture: 2.0 * std::f64::consts::FRAC_PI_3,
            max_obs: None,
            max_steps: 120,
            history_steps: 8,
            center_lead_steps: 10,
            warmup_steps: 2,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
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
        toml::to_string(self).expect("scenario config always serializes")
    }

    pub fn max_obs(&self) -> usize {
        self.max_obs.unwrap_or(self.n_obstacles)
    }

    /// Flattened observation length, `(2 + m_max) * 4`.
    pub fn obs_dim(&self) -> usize {
        (2 + self.max_obs()) * super::OBS_WIDTH
    }

    /// Arc-length spacing used when scoring trajectories: half a step of travel.
    pub fn trajectory_ds(&self) -> f64 {
        0.5 * self.uav_speed * self.dt
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_uavs == 0 {
            return bad("n_uavs must be >= 1".into());
        }
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed {} exceeds 2^63 - 1", self.seed));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt {}", self.dt));
        }
        if !(self.uav_speed > 0.0) {
            return bad(format!("uav_speed {}", self.uav_speed));
        }
        if !(self.arena_width > 0.0 && self.arena_length > 0.0) {
            return bad("arena dimensions must be positive".into());
        }
        let [lo, hi] = self.obstacle_speed;
        if !(lo >= 0.0 && lo <= hi) {
            return bad(format!("obstacle_speed {:?}", self.obstacle_speed));
        }
        if !(self.d_col > 0.0 && self.d_col < self.d_safe) {
            return bad(format!("need 0 < d_col < d_safe, got {} / {}", self.d_col, self.d_safe));
        }
        if !(self.d_safe < self.obstacle_radius) {
            return bad("need d_safe < obstacle_radius".into());
        }
        if !(self.swarm_radius > 0.0 && self.field_gain > 0.0) {
            return bad("swarm_radius and field_gain must be positive".into());
        }
        if !(self.d_bar_u2u >= self.d_col) {
            return bad("d_bar_u2u must be >= d_col".into());
        }
        if !(self.sense_range > 0.0 && self.sense_aperture > 0.0) {
            return bad("sensor range and aperture must be positive".into());
        }
        if self.max_steps == 0 || self.history_steps < 2 {
            return bad("max_steps >= 1 and history_steps >= 2 required".into());
        }
        Ok(())
    }
}
