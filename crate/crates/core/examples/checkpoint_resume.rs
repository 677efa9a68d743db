//! Trains in two legs through a checkpoint and checks that the resumed run
//! matches an uninterrupted one exactly.
//!
//! ```bash
//! cargo run --release --example checkpoint_resume
//! ```

use contour_swarm::harness::{read_metrics_csv, train, RunConfig};

fn main() -> contour_swarm::Result<()> {
    let dir = std::env::temp_dir().join(format!("contour-swarm-resume-{}", std::process::id()));
    let mut run = RunConfig::for_scenario("2U1O")?;
    run.episodes = 12;
    run.checkpoint_interval = 6;
    run.seed = 5;

    let full = train(&run, &dir.join("full"), None)?;

    let mut first = run.clone();
    first.episodes = 6;
    let leg = train(&first, &dir.join("leg1"), None)?;
    let resumed = train(&run, &dir.join("leg2"), Some(&leg.checkpoint))?;

    let a = read_metrics_csv(dir.join("full/metrics.csv"))?;
    let b = read_metrics_csv(dir.join("leg2/metrics.csv"))?;
    println!("uninterrupted and resumed metrics identical: {}", a == b);
    let same_params = full
        .agents
        .iter()
        .zip(&resumed.agents)
        .all(|(x, y)| x.policy == y.policy && x.value == y.value);
    println!("final parameters identical: {same_params}");
    std::fs::remove_dir_all(&dir).map_err(|e| contour_swarm::Error::io(&dir, e))?;
    Ok(())
}
