//! Training-free contour-following planner used as the comparison baseline.
//!
//! Every control step a joint PSO searches the heading changes of all active
//! UAVs. A candidate is scored by the contour cost of each UAV's recent
//! trajectory extended by an arc that keeps applying the candidate heading
//! change for [`LOOKAHEAD_STEPS`] steps, summed over UAVs; the formation
//! term plays no part. Before the search, UAVs closer than `d_bar_u2u` are
//! moved apart by the separation repair and the extensions start from the
//! repaired positions. Candidates that would put two UAVs closer than
//! `d_bar_u2u` are infeasible.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, EpisodeState, ScenarioConfig};
use crate::field::{ObstacleSpec, PotentialField, SwarmFieldSpec};
use crate::pso::{adjust_uav_positions, min_pairwise_distance, optimize_from, PsoParams};
use crate::trajectory::Trajectory;
use crate::{Error, Result, Vec2, MAX_HEADING_DELTA};

/// Steps of the constant-turn arc appended to each UAV's history when a
/// candidate heading change is scored.
pub const LOOKAHEAD_STEPS: usize = 4;

/// PSO budget of the baseline: 30 particles, 50 iterations.
pub fn default_params() -> PsoParams {
    PsoParams {
        n_iters: 50,
        ..PsoParams::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourPlan {
    pub actions: Vec<Action>,
    /// Field intensity at each UAV's (repaired) position: the contour it follows.
    pub levels: Vec<f64>,
    /// Position each UAV reaches if it applies its action.
    pub waypoints: Vec<Vec2>,
    pub plan_seconds: f64,
    pub best_cost: f64,
    pub cost_history: Vec<f64>,
}

/// The field as it will be after one control step: obstacles and the virtual
/// center advanced along their constant velocities.
pub fn predicted_field(state: &EpisodeState, config: &ScenarioConfig) -> Result<PotentialField> {
    let dt = config.dt;
    let obstacles = state
        .obstacles
        .iter()
        .map(|o| {
            ObstacleSpec::new(
                o.position + o.velocity * dt,
                o.velocity,
                config.obstacle_radius,
                config.d_safe,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let center = state.virtual_center + state.virtual_center_velocity * dt;
    let swarm = SwarmFieldSpec::new(center, config.uav_speed, config.swarm_radius)?;
    PotentialField::new(obstacles, swarm)?.with_gain(config.field_gain)
}

fn heading_point(from: Vec2, heading: f64, step: f64) -> Vec2 {
    from + Vec2::new(heading.cos(), heading.sin()) * step
}

/// Plans one joint step. Retired UAVs get a zero action and stay in place.
///
/// `params.bounds` is ignored; the search box is `[-pi/4, pi/4]` per active
/// UAV. Particle 0 is the all-straight candidate, the rest are uniform.
pub fn plan_step(
    state: &EpisodeState,
    config: &ScenarioConfig,
    field: &PotentialField,
    params: &PsoParams,
) -> Result<ContourPlan> {
    let started = Instant::now();
    let n = state.uavs.len();
    let active: Vec<usize> = state.active().map(|(i, _)| i).collect();
    let mut actions = vec![Action::new(0.0); n];
    let mut waypoints: Vec<Vec2> = state.uavs.iter().map(|u| u.position).collect();
    let mut levels: Vec<f64> = waypoints.iter().map(|&p| field.intensity(p)).collect();
    if active.is_empty() {
        return Ok(ContourPlan {
            actions,
            levels,
            waypoints,
            plan_seconds: started.elapsed().as_secs_f64().max(f64::MIN_POSITIVE),
            best_cost: 0.0,
            cost_history: Vec::new(),
        });
    }

    let current: Vec<Vec2> = active.iter().map(|&i| state.uavs[i].position).collect();
    let anchors = if current.len() >= 2 && min_pairwise_distance(&current) < config.d_bar_u2u {
        let adj = adjust_uav_positions(&current, field, config.d_bar_u2u, params)?;
        adj.positions
    } else {
        current
    };
    for (&i, &a) in active.iter().zip(&anchors) {
        levels[i] = field.intensity(a);
    }

    let step_len = config.uav_speed * config.dt;
    let ds = config.trajectory_ds();
    let histories: Vec<Vec<Vec2>> = active
        .iter()
        .zip(&anchors)
        .map(|(&i, &a)| {
            let mut h = state.uavs[i].history(config.history_steps).to_vec();
            *h.last_mut().expect("path is never empty") = a;
            h.push(a);
            h
        })
        .collect();
    let headings: Vec<f64> = active.iter().map(|&i| state.uavs[i].heading).collect();

    let cost = |x: &[f64]| -> f64 {
        let next: Vec<Vec2> = x
            .iter()
            .zip(&anchors)
            .zip(&headings)
            .map(|((&d, &a), &h)| heading_point(a, h + d, step_len))
            .collect();
        if next.len() >= 2 && min_pairwise_distance(&next) < config.d_bar_u2u {
            return f64::INFINITY;
        }
        let mut total = 0.0;
        for (k, hist) in histories.iter().enumerate() {
            let mut pts = hist.clone();
            pts.pop();
            let mut p = anchors[k];
            let mut h = headings[k];
            for _ in 0..LOOKAHEAD_STEPS {
                h += x[k];
                p = heading_point(p, h, step_len);
                pts.push(p);
            }
            match Trajectory::resample_uniform(&pts, ds).and_then(|t| t.contour_cost(field)) {
                Ok(c) => total += c,
                Err(_) => return f64::INFINITY,
            }
        }
        total
    };

    let dims = active.len();
    let mut p = params.clone();
    p.bounds = vec![(-MAX_HEADING_DELTA, MAX_HEADING_DELTA); dims];
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0xba5e_11e0);
    let mut init = vec![vec![0.0; dims]];
    while init.len() < p.n_particles {
        init.push(
            (0..dims)
                .map(|_| rng.gen_range(-MAX_HEADING_DELTA..=MAX_HEADING_DELTA))
                .collect(),
        );
    }
    let result = optimize_from(cost, init, &p)?;

    for (k, &i) in active.iter().enumerate() {
        let d = result.best_position[k];
        actions[i] = Action::new(d);
        let u = &state.uavs[i];
        waypoints[i] = heading_point(u.position, u.heading + d, step_len);
    }
    Ok(ContourPlan {
        actions,
        levels,
        waypoints,
        plan_seconds: started.elapsed().as_secs_f64().max(f64::MIN_POSITIVE),
        best_cost: result.best_cost,
        cost_history: result.cost_history,
    })
}

pub const TIMING_HEADER: [&str; 3] = ["step", "uav", "plan_ms"];

/// One row per UAV that was planned for; `plan_ms` is the duration of the
/// joint call that produced its action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub step: usize,
    pub uav: usize,
    pub plan_ms: f64,
}

pub fn write_timing_csv(path: impl AsRef<Path>, rows: &[TimingRow]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_timing(file, rows)
}

pub fn write_timing<W: Write>(w: W, rows: &[TimingRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(TIMING_HEADER)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::io("<timing csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{reset, step};

    #[test]
    fn straight_on_flat_field() {
        let cfg = ScenarioConfig {
            n_uavs: 1,
            n_obstacles: 0,
            ..ScenarioConfig::default()
        };
        let mut state = reset(&cfg).unwrap();
        for _ in 0..3 {
            step(&mut state, &cfg, &[Action::new(0.0)], None).unwrap();
        }
        let field = predicted_field(&state, &cfg).unwrap();
        let plan = plan_step(&state, &cfg, &field, &default_params()).unwrap();
        assert!(plan.actions[0].heading_delta.abs() <= 0.05);
        assert!(plan.plan_seconds > 0.0);
        assert!((plan.waypoints[0] - state.uavs[0].position).norm() <= cfg.uav_speed * cfg.dt + 1e-9);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = ScenarioConfig {
            n_uavs: 3,
            n_obstacles: 2,
            seed: 4,
            ..ScenarioConfig::default()
        };
        let mut state = reset(&cfg).unwrap();
        for _ in 0..3 {
            step(&mut state, &cfg, &[Action::new(0.1); 3], None).unwrap();
        }
        let field = predicted_field(&state, &cfg).unwrap();
        let params = default_params().with_seed(9);
        let a = plan_step(&state, &cfg, &field, &params).unwrap();
        let b = plan_step(&state, &cfg, &field, &params).unwrap();
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.cost_history, b.cost_history);
    }
}
