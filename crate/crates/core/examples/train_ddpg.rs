//! Trains independent DDPG agents on 2U1O, checkpoints them and runs a
//! noise-free evaluation.
//!
//! ```bash
//! RUST_LOG=info cargo run --release --example train_ddpg -- [episodes] [out_dir]
//! ```

use std::path::PathBuf;

use contour_swarm::harness::{evaluate, train, RunConfig};

fn main() -> contour_swarm::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let episodes = args.next().and_then(|s| s.parse().ok()).unwrap_or(1500);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/train_ddpg".into()));

    let mut run = RunConfig::for_scenario("2U1O")?;
    run.episodes = episodes;
    let trained = train(&run, &out, None)?;

    let tenth = (episodes / 10).max(1);
    let mean =
        |r: &[contour_swarm::harness::MetricsRecord]| r.iter().map(|m| m.return_swarming).sum::<f64>() / r.len() as f64;
    println!(
        "swarming return: first {tenth} episodes {:.2}, last {tenth} episodes {:.2}",
        mean(&trained.records[..tenth]),
        mean(&trained.records[episodes - tenth..])
    );

    let report = evaluate(&run, &trained.agents, 100, Some(&out))?;
    println!(
        "evaluation: success {:.0}%, safe u2o {:.0}%, energy {:.3}, reaction {:.2e} s",
        100.0 * report.success_rate,
        100.0 * report.safe_u2o,
        report.energy.mean,
        report.reaction_time.mean
    );
    println!("outputs in {}", out.display());
    Ok(())
}
