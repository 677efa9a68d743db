//! Cooperative collision avoidance for UAV swarms driven by a contour reward.
//!
//! The environment is mapped onto a repulsive potential field (obstacles plus
//! the swarm's virtual center). Each UAV is rewarded for flying trajectories
//! that follow contours of that field, scored with an active-contour cost,
//! plus a formation term gated by a collision indicator. Every UAV learns
//! with its own DDPG agent; no parameters or observations are shared.
//!
//! Module map:
//!
//! - [`field`]: obstacle and swarm repulsive fields, intensity and gradient.
//! - [`trajectory`]: arc-length resampled polylines, contour cost, curvature energy.
//! - [`pso`]: particle swarm optimizer and the UAV separation repair.
//! - [`env`]: the episodic multi-UAV simulator.
//! - [`reward`]: per-UAV reward (contour term plus swarming term).
//! - [`agent`]: independent DDPG learners with hand-written backprop.
//! - [`baseline`]: PSO contour-following planner used for comparison.
//! - [`harness`]: training, evaluation, benchmarking and CSV export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod baseline;
pub mod env;
pub mod error;
pub mod field;
pub mod harness;
pub mod pso;
pub mod reward;
pub mod trajectory;

pub use error::{Error, Result};

/// 2D point or vector, in meters or meters per second.
pub type Vec2 = nalgebra::Vector2<f64>;

/// Largest heading change a UAV may apply in one control step.
pub const MAX_HEADING_DELTA: f64 = std::f64::consts::FRAC_PI_4;
