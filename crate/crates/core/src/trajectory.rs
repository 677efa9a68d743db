//! Arc-length parameterized trajectories and the two functionals evaluated on
//! them: the active-contour cost and the curvature energy.

use crate::field::{grad_phi, PotentialField};
use crate::{Error, Result, Vec2};

/// Polyline with (nominally) uniform arc-length spacing between waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    waypoints: Vec<Vec2>,
    spacing: f64,
}

impl Trajectory {
    /// Wraps waypoints that are already uniformly spaced by `spacing`.
    pub fn from_uniform(waypoints: Vec<Vec2>, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing {spacing}")));
        }
        Ok(Self { waypoints, spacing })
    }

    /// Resamples a polyline at uniform arc-length steps close to `ds`.
    ///
    /// The polyline length `L` is split into `n = max(1, round(L / ds))`
    /// equal pieces, so the realised spacing is `L / n` and both endpoints
    /// are kept. Spacing is measured along the input polyline.
    pub fn resample_uniform(points: &[Vec2], ds: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewWaypoints {
                needed: 2,
                got: points.len(),
            });
        }
        if !(ds > 0.0 && ds.is_finite()) {
            return Err(Error::InvalidParameter(format!("ds {ds}")));
        }
        let seg_len: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let total: f64 = seg_len.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroLengthTrajectory);
        }
        let n = ((total / ds).round() as usize).max(1);
        let spacing = total / n as f64;

        let mut out = Vec::with_capacity(n + 1);
        out.push(points[0]);
        let mut seg = 0;
        let mut seg_start = 0.0;
        for k in 1..n {
            let s = k as f64 * spacing;
            while seg + 1 < seg_len.len() && seg_start + seg_len[seg] < s {
                seg_start += seg_len[seg];
                seg += 1;
            }
            let t = if seg_len[seg] > 0.0 {
                ((s - seg_start) / seg_len[seg]).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push(points[seg] + (points[seg + 1] - points[seg]) * t);
        }
        out.push(points[points.len() - 1]);
        Ok(Self {
            waypoints: out,
            spacing,
        })
    }

    pub fn waypoints(&self) -> &[Vec2] {
        &self.waypoints
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Central second difference at interior waypoint `i`.
    pub fn second_derivative(&self, i: usize) -> Result<Vec2> {
        let len = self.waypoints.len();
        if i == 0 || i + 1 >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        let w = &self.waypoints;
        Ok((w[i - 1] - 2.0 * w[i] + w[i + 1]) / (self.spacing * self.spacing))
    }

    fn interior_second_derivatives(&self) -> Result<impl Iterator<Item = (usize, Vec2)> + '_> {
        if self.waypoints.len() < 3 {
            return Err(Error::TooFewWaypoints {
                needed: 3,
                got: self.waypoints.len(),
            });
        }
        let inv = 1.0 / (self.spacing * self.spacing);
        Ok(self
            .waypoints
            .windows(3)
            .enumerate()
            .map(move |(k, w)| (k + 1, (w[0] - 2.0 * w[1] + w[2]) * inv)))
    }

    /// Rectangle-rule contour cost over interior waypoints:
    /// `sum(0.5 |S''|^2 - 0.5 |grad phi(S)|^2) * ds`.
    pub fn contour_cost(&self, field: &PotentialField) -> Result<f64> {
        let mut acc = 0.0;
        for (i, dd) in self.interior_second_derivatives()? {
            let g = grad_phi(self.waypoints[i], field);
            acc += 0.5 * dd.norm_squared() - 0.5 * g.norm_squared();
        }
        Ok(acc * self.spacing)
    }

    /// Smoothness part of the contour cost alone.
    pub fn smoothness_cost(&self) -> Result<f64> {
        let acc: f64 = self
            .interior_second_derivatives()?
            .map(|(_, dd)| 0.5 * dd.norm_squared())
            .sum();
        Ok(acc * self.spacing)
    }

    /// Curvature energy `sum |S''| * ds` over interior waypoints.
    pub fn energy(&self) -> Result<f64> {
        let acc: f64 = self.interior_second_derivatives()?.map(|(_, dd)| dd.norm()).sum();
        Ok(acc * self.spacing)
    }
}

pub fn contour_cost(traj: &Trajectory, field: &PotentialField) -> Result<f64> {
    traj.contour_cost(field)
}

pub fn energy(traj: &Trajectory) -> Result<f64> {
    traj.energy()
}
