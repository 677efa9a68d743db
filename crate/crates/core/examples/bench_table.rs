//! Trains a 3U2O policy, then compares it with the PSO planner on matched
//! evaluation seeds and prints the comparison table.
//!
//! ```bash
//! RUST_LOG=info cargo run --release --example bench_table -- [train_episodes] [bench_episodes] [out_dir]
//! ```

use std::path::PathBuf;

use contour_swarm::harness::{bench, train, RunConfig};

fn main() -> contour_swarm::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let train_episodes = args.next().and_then(|s| s.parse().ok()).unwrap_or(1500);
    let bench_episodes = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/bench_table".into()));

    let mut run = RunConfig::for_scenario("3U2O")?;
    run.episodes = train_episodes;
    let trained = train(&run, &out.join("train"), None)?;
    let report = bench(&run, &trained.agents, bench_episodes, Some(&out))?;

    println!(
        "{:<16} {:>12} {:>10} {:>10} {:>10} {:>9} {:>9}",
        "method", "reaction_s", "energy", "min_u2o", "min_u2u", "safe_u2o", "safe_u2u"
    );
    for row in &report.rows {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |s| format!("{:.0}%", 100.0 * s));
        println!(
            "{:<16} {:>12.3e} {:>10.3} {:>10.2} {:>10.2} {:>9} {:>9}",
            row.method,
            row.reaction_time_mean,
            row.energy_mean,
            row.min_d_u2o,
            row.min_d_u2u,
            pct(row.safe_u2o),
            pct(row.safe_u2u)
        );
    }
    println!(
        "latency ratio baseline/policy {:.0}x",
        report.baseline.reaction_time.mean / report.policy.reaction_time.mean
    );
    Ok(())
}
