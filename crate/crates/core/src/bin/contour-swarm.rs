use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contour_swarm::agent::read_checkpoint;
use contour_swarm::harness::{bench, evaluate, export_field_grid, train, RunConfig, TrainProgress};
use contour_swarm::Result;

#[derive(Parser)]
#[command(
    version,
    about = "Train, evaluate and benchmark contour-reward UAV swarm controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one DDPG agent per UAV.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Noise-free evaluation of a trained checkpoint.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Trained policy against the PSO contour planner on matched seeds.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Field intensity and gradient on a grid over the arena.
    Export {
        #[command(flatten)]
        run: RunArgs,
        /// Grid spacing in meters.
        #[arg(long, default_value_t = 10.0)]
        spacing: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Named scenario such as 2U1O or 3U2O.
    #[arg(long, default_value = "2U1O")]
    scenario: String,
    /// TOML run configuration; overrides --scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training episodes, or evaluation episodes for eval and bench.
    #[arg(long)]
    episodes: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "runs/out")]
    out: PathBuf,
}

impl RunArgs {
    fn resolve(&self, checkpoint_run: Option<RunConfig>) -> Result<RunConfig> {
        let mut run = match (&self.config, checkpoint_run) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(run)) => run,
            (None, None) => RunConfig::for_scenario(&self.scenario)?,
        };
        if let Some(seed) = self.seed {
            run.seed = seed;
        }
        Ok(run)
    }
}

fn checkpoint_run(path: &PathBuf) -> Result<(RunConfig, Vec<contour_swarm::agent::DdpgAgent>)> {
    let ckpt = read_checkpoint(path)?;
    let progress = TrainProgress::from_checkpoint(&ckpt)?;
    Ok((progress.run, ckpt.agents))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { run: args, resume } => {
            let mut run = args.resolve(None)?;
            if let Some(n) = args.episodes {
                run.episodes = n;
            }
            let out = train(&run, &args.out, resume.as_deref())?;
            let n = out.records.len();
            let tail = &out.records[n - (n / 10).max(1)..];
            println!(
                "trained {n} episodes; last {} episodes: success {:.0}%, mean swarming return {:.2}",
                tail.len(),
                100.0 * tail.iter().filter(|r| r.success).count() as f64 / tail.len() as f64,
                tail.iter().map(|r| r.return_swarming).sum::<f64>() / tail.len() as f64
            );
            println!("checkpoint {}", out.checkpoint.display());
        }
        Command::Eval { run: args, checkpoint } => {
            let (ckpt_run, agents) = checkpoint_run(&checkpoint)?;
            let run = args.resolve(Some(ckpt_run))?;
            let r = evaluate(&run, &agents, args.episodes.unwrap_or(100), Some(&args.out))?;
            println!(
                "{} episodes: success {:.0}%, energy {:.3} +- {:.3}, reaction {:.2e} s, safe u2o {:.0}%, safe u2u {:.0}%",
                r.episodes,
                100.0 * r.success_rate,
                r.energy.mean,
                r.energy.std,
                r.reaction_time.mean,
                100.0 * r.safe_u2o,
                100.0 * r.safe_u2u
            );
        }
        Command::Bench { run: args, checkpoint } => {
            let (ckpt_run, agents) = checkpoint_run(&checkpoint)?;
            let run = args.resolve(Some(ckpt_run))?;
            let r = bench(&run, &agents, args.episodes.unwrap_or(50), Some(&args.out))?;
            println!(
                "{:<16} {:>14} {:>10} {:>10} {:>10} {:>8}",
                "method", "reaction_s", "energy", "min_u2o", "min_u2u", "success"
            );
            for row in &r.rows {
                println!(
                    "{:<16} {:>14.3e} {:>10.3} {:>10.2} {:>10.2} {:>8}",
                    row.method,
                    row.reaction_time_mean,
                    row.energy_mean,
                    row.min_d_u2o,
                    row.min_d_u2u,
                    row.success_rate.map_or("-".into(), |s| format!("{:.0}%", 100.0 * s))
                );
            }
        }
        Command::Export { run: args, spacing } => {
            let run = args.resolve(None)?;
            let rows = export_field_grid(&run, &args.out, spacing)?;
            println!(
                "wrote {} grid nodes to {}",
                rows.len(),
                args.out.join("field_grid.csv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
