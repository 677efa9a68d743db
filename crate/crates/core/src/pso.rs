//! Particle swarm optimization and the UAV separation repair built on it.
//!
//! The update follows the plain inertia form
//!
//! ```text
//! v' = mu * v + c1 * (p_i - x) + c2 * (p_g - x)
//! x' = x + v'
//! ```
//!
//! with `mu` redrawn uniformly from `inertia_range` for every particle at
//! every iteration. Positions are clamped to the bounds after each move.
//! `+inf` is a legal cost (infeasible); `NaN` aborts the search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::{phi_total, PotentialField};
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub n_particles: usize,
    pub n_iters: usize,
    pub c1: f64,
    pub c2: f64,
    pub inertia_range: (f64, f64),
    /// Per-dimension `[lo, hi]`. Left empty for [`adjust_uav_positions`],
    /// which derives its own box around the input.
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            n_particles: 30,
            n_iters: 100,
            c1: 1.5,
            c2: 1.5,
            inertia_range: (0.0, 1.0),
            bounds: Vec::new(),
            seed: 0,
        }
    }
}

impl PsoParams {
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, dims: usize) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::InvalidParameter("PSO needs at least 2 particles".into()));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::InvalidParameter("PSO needs c1, c2 > 0".into()));
        }
        let (lo, hi) = self.inertia_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "inertia range {:?} not inside [0, 1]",
                self.inertia_range
            )));
        }
        if dims == 0 {
            return Err(Error::InvalidParameter("PSO needs dims >= 1".into()));
        }
        if self.bounds.len() != dims {
            return Err(Error::InvalidParameter(format!(
                "{} bounds for {} dimensions",
                self.bounds.len(),
                dims
            )));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameter(format!("bad bound [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    /// Global best after initialization followed by one entry per iteration.
    pub cost_history: Vec<f64>,
    pub evaluations: usize,
}

/// Minimizes `cost` over the box in `params.bounds` starting from uniformly
/// random particles.
pub fn optimize<F>(cost: F, dims: usize, params: &PsoParams) -> Result<PsoResult>
where
    F: FnMut(&[f64]) -> f64,
{
    params.validate(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init = (0..params.n_particles)
        .map(|_| {
            params
                .bounds
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..=hi) } else { lo })
                .collect()
        })
        .collect();
    run(cost, init, params, rng)
}

/// Minimizes `cost` starting from the given particle positions (one per
/// particle, clamped into bounds).
pub fn optimize_from<F>(cost: F, initial: Vec<Vec<f64>>, params: &PsoParams) -> Result<PsoResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let dims = initial.first().map_or(0, Vec::len);
    params.validate(dims)?;
    if initial.len() != params.n_particles || initial.iter().any(|p| p.len() != dims) {
        return Err(Error::ShapeMismatch(format!(
            "expected {} initial particles of dimension {}",
            params.n_particles, dims
        )));
    }
    let rng = ChaCha8Rng::seed_from_u64(params.seed);
    run(cost, initial, params, rng)
}

fn evaluate<F: FnMut(&[f64]) -> f64>(cost: &mut F, x: &[f64]) -> Result<f64> {
    let c = cost(x);
    if c.is_nan() {
        return Err(Error::NanCost { position: x.to_vec() });
    }
    Ok(c)
}

fn run<F>(mut cost: F, mut positions: Vec<Vec<f64>>, params: &PsoParams, mut rng: ChaCha8Rng) -> Result<PsoResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let dims = params.bounds.len();
    for p in positions.iter_mut() {
        clamp(p, &params.bounds);
    }
    let mut velocities = vec![vec![0.0; dims]; positions.len()];
    let mut personal = positions.clone();
    let mut personal_cost = Vec::with_capacity(positions.len());
    for p in &positions {
        personal_cost.push(evaluate(&mut cost, p)?);
    }
    let mut evaluations = positions.len();

    let mut g = argmin(&personal_cost);
    let mut best = personal[g].clone();
    let mut best_cost = personal_cost[g];
    let mut history = Vec::with_capacity(params.n_iters + 1);
    history.push(best_cost);

    let (mu_lo, mu_hi) = params.inertia_range;
    for _ in 0..params.n_iters {
        for i in 0..positions.len() {
            let mu = if mu_lo < mu_hi {
                rng.gen_range(mu_lo..=mu_hi)
            } else {
                mu_lo
            };
            let x = &mut positions[i];
            let v = &mut velocities[i];
            for d in 0..dims {
                v[d] = mu * v[d] + params.c1 * (personal[i][d] - x[d]) + params.c2 * (best[d] - x[d]);
                x[d] += v[d];
            }
            clamp(x, &params.bounds);
        }
        for i in 0..positions.len() {
            let c = evaluate(&mut cost, &positions[i])?;
            evaluations += 1;
            if c < personal_cost[i] {
                personal_cost[i] = c;
                personal[i].clone_from(&positions[i]);
            }
        }
        g = argmin(&personal_cost);
        if personal_cost[g] < best_cost {
            best_cost = personal_cost[g];
            best.clone_from(&personal[g]);
        }
        history.push(best_cost);
    }

    Ok(PsoResult {
        best_position: best,
        best_cost,
        cost_history: history,
        evaluations,
    })
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

// first index wins ties, so all-infinite swarms follow particle 0
fn argmin(costs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = i;
        }
    }
    best
}

/// Smallest pairwise distance, `+inf` for fewer than two points.
pub fn min_pairwise_distance(points: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

/// Largest displacement between two equally long position lists.
pub fn max_shift(before: &[Vec2], after: &[Vec2]) -> f64 {
    before
        .iter()
        .zip(after)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Repair cost: separation term (the separation itself when it clears the
/// threshold, infinite otherwise) plus the largest individual shift.
pub fn repair_cost(original: &[Vec2], candidate: &[Vec2], threshold: f64) -> f64 {
    let sep = min_pairwise_distance(candidate);
    let thres = if sep >= threshold { sep } else { f64::INFINITY };
    thres + max_shift(original, candidate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adjustment {
    pub positions: Vec<Vec2>,
    pub shift: f64,
    pub min_separation: f64,
    /// Field intensity at each adjusted position, i.e. the contour level the
    /// UAV is moved onto.
    pub levels: Vec<f64>,
}

fn to_flat(points: &[Vec2]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn from_flat(x: &[f64]) -> Vec<Vec2> {
    x.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect()
}

/// Moves UAVs as little as possible so every pair is at least `d_bar` apart.
///
/// An already separated input is returned unchanged. Otherwise particle 0 is
/// the input itself, particle 1 is the input dilated about its centroid just
/// enough to clear the threshold, and the remaining particles are the input
/// with uniform perturbations in `[-d_bar, d_bar]` per coordinate. If no
/// particle ever becomes feasible the search is retried with a doubled
/// perturbation scale before giving up with [`Error::Infeasible`].
pub fn adjust_uav_positions(
    positions: &[Vec2],
    field: &PotentialField,
    d_bar: f64,
    params: &PsoParams,
) -> Result<Adjustment> {
    if positions.len() < 2 {
        return Err(Error::InvalidParameter("separation repair needs >= 2 UAVs".into()));
    }
    if !(d_bar > 0.0) {
        return Err(Error::InvalidParameter(format!("d_bar {d_bar}")));
    }
    if positions.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite("UAV positions".into()));
    }
    let levels = |pts: &[Vec2]| pts.iter().map(|&p| phi_total(p, field)).collect();

    let sep = min_pairwise_distance(positions);
    if sep >= d_bar {
        return Ok(Adjustment {
            positions: positions.to_vec(),
            shift: 0.0,
            min_separation: sep,
            levels: levels(positions),
        });
    }

    let base = to_flat(positions);
    let centroid = positions.iter().sum::<Vec2>() / positions.len() as f64;
    let dilated: Option<Vec<f64>> = (sep > 0.0).then(|| {
        let scale = d_bar / sep * (1.0 + 1e-9);
        to_flat(
            &positions
                .iter()
                .map(|p| centroid + (p - centroid) * scale)
                .collect::<Vec<_>>(),
        )
    });

    let mut best_infeasible: Option<(Vec<f64>, f64)> = None;
    for attempt in 0..3u32 {
        let spread = d_bar * f64::from(1 << attempt);
        let reach = 2.0 * spread;
        let mut p = params.clone();
        p.seed = params.seed.wrapping_add(u64::from(attempt));
        p.bounds = base.iter().map(|&v| (v - reach, v + reach)).collect();
        if let Some(d) = &dilated {
            for (b, v) in p.bounds.iter_mut().zip(d) {
                b.0 = b.0.min(*v);
                b.1 = b.1.max(*v);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x0005_eed0_fa11);
        let mut init = Vec::with_capacity(p.n_particles);
        init.push(base.clone());
        if let Some(d) = &dilated {
            init.push(d.clone());
        }
        while init.len() < p.n_particles {
            init.push(base.iter().map(|&v| v + rng.gen_range(-spread..=spread)).collect());
        }

        let result = optimize_from(|x| repair_cost(positions, &from_flat(x), d_bar), init, &p)?;
        if result.best_cost.is_finite() {
            let adjusted = from_flat(&result.best_position);
            return Ok(Adjustment {
                shift: max_shift(positions, &adjusted),
                min_separation: min_pairwise_distance(&adjusted),
                levels: levels(&adjusted),
                positions: adjusted,
            });
        }
        let cand_sep = min_pairwise_distance(&from_flat(&result.best_position));
        if best_infeasible.as_ref().is_none_or(|(_, s)| cand_sep > *s) {
            best_infeasible = Some((result.best_position, cand_sep));
        }
    }
    let (best, best_separation) = best_infeasible.expect("at least one attempt ran");
    Err(Error::Infeasible {
        best: from_flat(&best),
        best_separation,
    })
}
