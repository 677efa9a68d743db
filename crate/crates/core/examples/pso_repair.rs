//! Particle swarm optimization on a sphere, then the separation repair
//! pulling five crowded UAVs apart with the smallest possible shift.
//!
//! ```bash
//! cargo run --release --example pso_repair
//! ```

use contour_swarm::field::{PotentialField, SwarmFieldSpec};
use contour_swarm::pso::{adjust_uav_positions, min_pairwise_distance, optimize, PsoParams};
use contour_swarm::Vec2;

fn main() -> contour_swarm::Result<()> {
    let params = PsoParams {
        n_iters: 200,
        ..PsoParams::default()
    }
    .with_bounds(vec![(-5.0, 5.0); 4])
    .with_seed(7);
    let res = optimize(|x| x.iter().map(|v| v * v).sum(), 4, &params)?;
    println!(
        "sphere: best cost {:.3e} after {} evaluations, best {:?}",
        res.best_cost,
        res.evaluations,
        res.best_position.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
    );

    let crowded = vec![
        Vec2::new(100.0, 100.0),
        Vec2::new(112.0, 104.0),
        Vec2::new(95.0, 118.0),
        Vec2::new(120.0, 125.0),
        Vec2::new(140.0, 100.0),
    ];
    let field = PotentialField::new(Vec::new(), SwarmFieldSpec::new(Vec2::new(115.0, 110.0), 10.0, 150.0)?)?;
    let d_bar = 30.0;
    let adj = adjust_uav_positions(&crowded, &field, d_bar, &PsoParams::default().with_seed(1))?;
    println!(
        "separation before {:.2} m, after {:.2} m (d_bar {d_bar})",
        min_pairwise_distance(&crowded),
        adj.min_separation
    );
    println!("largest shift {:.2} m", adj.shift);
    for (k, (a, b)) in crowded.iter().zip(&adj.positions).enumerate() {
        println!(
            "uav {k}: ({:6.1}, {:6.1}) -> ({:6.1}, {:6.1}), level {:.4}",
            a.x, a.y, b.x, b.y, adj.levels[k]
        );
    }
    Ok(())
}
