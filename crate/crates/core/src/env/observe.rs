use super::{EpisodeState, ScenarioConfig};
use crate::Vec2;

/// Columns per observation row.
pub const OBS_WIDTH: usize = 4;

/// Per-UAV observation: a `(2 + m_max) x 4` array.
///
/// Row 0 is the UAV itself `(p_x, p_y, v_x, v_y)`, row 1 the swarm
/// `(p*_x, p*_y, vbar_x, vbar_y)` with `vbar` the UAV's pre-planned velocity,
/// and rows 2.. the sensed obstacles nearest first. Unused obstacle rows are
/// zero and masked out.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub rows: Vec<[f64; OBS_WIDTH]>,
    /// Validity of each obstacle row (`rows[2 + k]`).
    pub mask: Vec<bool>,
}

impl Observation {
    pub fn flatten(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    pub fn obstacle_rows(&self) -> &[[f64; OBS_WIDTH]] {
        &self.rows[2..]
    }
}

/// Whether a UAV at `from` heading `heading` senses a point at `target`.
pub fn senses(from: Vec2, heading: f64, target: Vec2, config: &ScenarioConfig) -> bool {
    let d = target - from;
    let dist = d.norm();
    if dist > config.sense_range {
        return false;
    }
    if dist == 0.0 {
        return true;
    }
    let bearing = d.y.atan2(d.x) - heading;
    let off = bearing.sin().atan2(bearing.cos()).abs();
    off <= 0.5 * config.sense_aperture
}

pub fn observe(state: &EpisodeState, config: &ScenarioConfig, uav_index: usize) -> Observation {
    let m = config.max_obs();
    let uav = &state.uavs[uav_index];
    let v = uav.velocity(state.uav_speed);
    let mut rows = Vec::with_capacity(2 + m);
    rows.push([uav.position.x, uav.position.y, v.x, v.y]);
    rows.push([
        state.virtual_center.x,
        state.virtual_center.y,
        uav.planned_velocity.x,
        uav.planned_velocity.y,
    ]);

    let mut seen: Vec<(f64, usize)> = state
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| senses(uav.position, uav.heading, o.position, config))
        .map(|(k, o)| ((o.position - uav.position).norm(), k))
        .collect();
    seen.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut mask = vec![false; m];
    for (slot, valid) in mask.iter_mut().enumerate() {
        match seen.get(slot) {
            Some(&(_, k)) => {
                let o = &state.obstacles[k];
                rows.push([o.position.x, o.position.y, o.velocity.x, o.velocity.y]);
                *valid = true;
            }
            None => rows.push([0.0; OBS_WIDTH]),
        }
    }
    Observation { rows, mask }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{reset, ObstacleState};

    fn setup(obstacles: Vec<Vec2>, max_obs: usize) -> (EpisodeState, ScenarioConfig) {
        let cfg = ScenarioConfig {
            n_uavs: 1,
            n_obstacles: obstacles.len(),
            max_obs: Some(max_obs),
            ..ScenarioConfig::default()
        };
        let mut state = reset(&cfg).unwrap();
        state.obstacles = obstacles
            .into_iter()
            .map(|p| ObstacleState {
                position: p,
                velocity: Vec2::new(-1.0, 0.5),
            })
            .collect();
        (state, cfg)
    }

    #[test]
    fn lone_uav_sees_virtual_center_and_nothing_else() {
        let (state, cfg) = setup(vec![], 2);
        let o = observe(&state, &cfg, 0);
        assert_eq!(o.rows.len(), 4);
        assert_eq!(o.rows[1][0], state.virtual_center.x);
        assert_eq!(o.rows[1][1], state.virtual_center.y);
        assert_eq!(o.rows[1][2], state.uavs[0].planned_velocity.x);
        assert!(o.mask.iter().all(|m| !m));
        assert!(o.obstacle_rows().iter().all(|r| *r == [0.0; 4]));
        assert_eq!(o.flatten().len(), cfg.obs_dim());
    }

    #[test]
    fn obstacle_behind_is_masked_and_ahead_is_seen() {
        let (mut state, cfg) = setup(vec![Vec2::zeros()], 1);
        let p = state.uavs[0].position;
        state.obstacles[0].position = p - Vec2::new(50.0, 0.0);
        assert!(!observe(&state, &cfg, 0).mask[0]);
        state.obstacles[0].position = p + Vec2::new(cfg.sense_range - 1e-6, 0.0);
        let o = observe(&state, &cfg, 0);
        assert!(o.mask[0]);
        assert_eq!(
            o.rows[2],
            [state.obstacles[0].position.x, state.obstacles[0].position.y, -1.0, 0.5]
        );
    }

    #[test]
    fn nearest_obstacles_fill_rows_first() {
        let (mut state, cfg) = setup(vec![Vec2::zeros(); 3], 2);
        let p = state.uavs[0].position;
        state.obstacles[0].position = p + Vec2::new(150.0, 0.0);
        state.obstacles[1].position = p + Vec2::new(60.0, 10.0);
        state.obstacles[2].position = p + Vec2::new(100.0, -20.0);
        let o = observe(&state, &cfg, 0);
        assert_eq!(o.mask, vec![true, true]);
        assert_eq!(o.rows[2][0], state.obstacles[1].position.x);
        assert_eq!(o.rows[3][0], state.obstacles[2].position.x);
    }
}
