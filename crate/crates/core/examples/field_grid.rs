//! Samples the potential field of a 3-UAV, 2-obstacle scenario, prints a
//! coarse log-scale ASCII heatmap and writes the full grid to `field_grid.csv`.
//!
//! ```bash
//! cargo run --release --example field_grid -- [out_dir]
//! ```

use std::path::PathBuf;

use contour_swarm::env::reset;
use contour_swarm::harness::{field_grid, write_field_grid, RunConfig};

fn main() -> contour_swarm::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "runs/field_grid".into()));
    let run = RunConfig::for_scenario("3U2O")?;
    let state = reset(&run.scenario)?;

    let coarse = field_grid(&state, &run.scenario, 40.0)?;
    let width = (run.scenario.arena_width / 40.0) as usize + 1;
    let peak = coarse.iter().map(|r| r.phi).fold(0.0, f64::max);
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for row in coarse.chunks(width).rev() {
        let line: String = row
            .iter()
            .map(|r| {
                let t = r.phi.ln_1p() / peak.ln_1p();
                shades[((t * (shades.len() - 1) as f64).round() as usize).min(shades.len() - 1)]
            })
            .collect();
        println!("|{line}|");
    }
    for (k, o) in state.obstacles.iter().enumerate() {
        println!("obstacle {k} at ({:.0}, {:.0})", o.position.x, o.position.y);
    }

    std::fs::create_dir_all(&out).map_err(|e| contour_swarm::Error::io(&out, e))?;
    let fine = field_grid(&state, &run.scenario, 5.0)?;
    write_field_grid(out.join("field_grid.csv"), &fine)?;
    println!("wrote {} nodes to {}", fine.len(), out.join("field_grid.csv").display());
    Ok(())
}
