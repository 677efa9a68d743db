//! Flies a 3U2O episode with the PSO contour-following planner and reports
//! planning time, the contour levels it follows and the outcome.
//!
//! ```bash
//! cargo run --release --example baseline_planner -- [seed]
//! ```

use contour_swarm::baseline::{default_params, plan_step, predicted_field};
use contour_swarm::env::{reset, step};
use contour_swarm::harness::scenario;

fn main() -> contour_swarm::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(11);
    let mut config = scenario("3U2O")?;
    config.seed = seed;
    let mut state = reset(&config)?;
    let mut params = default_params();

    let mut plan_ms = Vec::new();
    let mut min_u2o = f64::INFINITY;
    let mut min_u2u = f64::INFINITY;
    while !state.done {
        params.seed = state.step as u64;
        let field = predicted_field(&state, &config)?;
        let plan = plan_step(&state, &config, &field, &params)?;
        plan_ms.push(plan.plan_seconds * 1e3);
        if state.step % 10 == 0 {
            let levels: Vec<String> = plan.levels.iter().map(|l| format!("{l:.4}")).collect();
            let deltas: Vec<String> = plan
                .actions
                .iter()
                .map(|a| format!("{:+.3}", a.heading_delta))
                .collect();
            println!(
                "step {:>3}: levels [{}] turns [{}]",
                state.step,
                levels.join(", "),
                deltas.join(", ")
            );
        }
        let res = step(&mut state, &config, &plan.actions, None)?;
        min_u2o = min_u2o.min(res.min_d_u2o);
        min_u2u = min_u2u.min(res.min_d_u2u);
    }
    let mean = plan_ms.iter().sum::<f64>() / plan_ms.len() as f64;
    println!("outcome {:?} after {} steps", state.reason, state.step);
    println!("mean plan time {mean:.2} ms over {} calls", plan_ms.len());
    println!("min distance to obstacles {min_u2o:.1} m, between UAVs {min_u2u:.1} m");
    Ok(())
}
