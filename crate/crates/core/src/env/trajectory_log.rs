use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EpisodeState;
use crate::Result;

pub const TRAJECTORY_HEADER: [&str; 8] = ["episode", "step", "entity_type", "entity_id", "x", "y", "vx", "vy"];

/// One row of the trajectory CSV.
///
/// `entity_type` is one of `uav`, `obstacle`, `virtual_center`, `target`.
/// Targets are written once per episode at step 0 with zero velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub episode: usize,
    pub step: usize,
    pub entity_type: String,
    pub entity_id: usize,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl TrajectoryRow {
    /// Rows describing every entity of `state` at its current step.
    pub fn snapshot(episode: usize, state: &EpisodeState) -> Vec<TrajectoryRow> {
        let row = |t: &str, id: usize, p: crate::Vec2, v: crate::Vec2| TrajectoryRow {
            episode,
            step: state.step,
            entity_type: t.to_string(),
            entity_id: id,
            x: p.x,
            y: p.y,
            vx: v.x,
            vy: v.y,
        };
        let mut rows = Vec::new();
        if state.step == 0 {
            for (i, u) in state.uavs.iter().enumerate() {
                rows.push(row("target", i, u.target, crate::Vec2::zeros()));
            }
        }
        for (i, u) in state.uavs.iter().enumerate() {
            let v = if u.arrived {
                crate::Vec2::zeros()
            } else {
                u.velocity(state.uav_speed)
            };
            rows.push(row("uav", i, u.position, v));
        }
        for (i, o) in state.obstacles.iter().enumerate() {
            rows.push(row("obstacle", i, o.position, o.velocity));
        }
        rows.push(row(
            "virtual_center",
            0,
            state.virtual_center,
            state.virtual_center_velocity,
        ));
        rows
    }
}

pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| crate::Error::io("<trajectory csv>", e))?;
    Ok(())
}
