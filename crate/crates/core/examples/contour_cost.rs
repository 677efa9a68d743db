//! Scores circular trajectories of increasing radius around a single
//! obstacle with the contour cost and shows that the cheapest circle hugs
//! the safe-distance ring.
//!
//! ```bash
//! cargo run --release --example contour_cost
//! ```

use std::f64::consts::TAU;

use contour_swarm::field::{ObstacleSpec, PotentialField, SwarmFieldSpec};
use contour_swarm::trajectory::Trajectory;
use contour_swarm::Vec2;

fn circle(center: Vec2, radius: f64, spacing: f64) -> contour_swarm::Result<Trajectory> {
    let n = (TAU * radius / spacing).round() as usize;
    let pts: Vec<Vec2> = (0..=n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            center + Vec2::new(t.cos(), t.sin()) * radius
        })
        .collect();
    Trajectory::resample_uniform(&pts, spacing)
}

fn main() -> contour_swarm::Result<()> {
    let center = Vec2::new(0.0, 0.0);
    let d_safe = 40.0;
    let obstacle = ObstacleSpec::new(center, Vec2::new(8.0, 0.0), 150.0, d_safe)?;
    let swarm = SwarmFieldSpec::new(Vec2::new(5000.0, 5000.0), 10.0, 150.0)?;
    let field = PotentialField::new(vec![obstacle], swarm)?.with_gain(500.0)?;

    let mut best = (f64::INFINITY, 0.0);
    println!(
        "{:>8} {:>14} {:>14} {:>14}",
        "radius", "smoothness", "contour", "energy"
    );
    for r in (20..=120).step_by(2).map(f64::from) {
        let traj = circle(center, r, 2.0)?;
        let cost = traj.contour_cost(&field)?;
        if cost < best.0 {
            best = (cost, r);
        }
        if (r as usize).is_multiple_of(10) {
            println!(
                "{r:>8.0} {:>14.5} {:>14.5} {:>14.5}",
                traj.smoothness_cost()?,
                cost,
                traj.energy()?
            );
        }
    }
    println!(
        "argmin radius {:.0} m (d_safe {d_safe:.0} m), cost {:.5}",
        best.1, best.0
    );
    Ok(())
}
