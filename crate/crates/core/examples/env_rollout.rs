//! Drives the simulator with a hand-written steer-to-target controller and
//! prints the per-step reward breakdown of UAV 0.
//!
//! ```bash
//! cargo run --release --example env_rollout -- [seed]
//! ```

use contour_swarm::env::{Action, Env};
use contour_swarm::harness::scenario;
use contour_swarm::MAX_HEADING_DELTA;

fn main() -> contour_swarm::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut config = scenario("3U1O")?;
    config.seed = seed;
    let (mut env, _) = Env::new(config)?;

    println!(
        "{:>4} {:>10} {:>8} {:>8} {:>10} {:>10}",
        "step", "contour", "form", "collide", "min_u2o", "min_u2u"
    );
    loop {
        let actions: Vec<Action> = env
            .state()
            .uavs
            .iter()
            .map(|u| {
                let want = u.planned_velocity.y.atan2(u.planned_velocity.x);
                let turn = (want - u.heading).sin().atan2((want - u.heading).cos());
                Action::new(turn.clamp(-MAX_HEADING_DELTA, MAX_HEADING_DELTA))
            })
            .collect();
        let res = env.step(&actions)?;
        if let Some(b) = res.breakdowns[0] {
            println!(
                "{:>4} {:>10.4} {:>8.3} {:>8.0} {:>10.1} {:>10.1}",
                env.state().step,
                b.contour,
                b.formation,
                b.collide,
                res.min_d_u2o,
                res.min_d_u2u
            );
        }
        if res.done {
            println!("episode ended: {:?} after {} steps", res.reason, env.state().step);
            break;
        }
    }
    Ok(())
}
