use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::write_serialized;
use super::{ensure_dir, RunConfig};
use crate::env::{reset, EpisodeState, ScenarioConfig};
use crate::reward::build_field;
use crate::{Error, Result, Vec2};

pub const FIELD_GRID_HEADER: [&str; 5] = ["x", "y", "phi", "grad_x", "grad_y"];

/// Field intensity and gradient at one grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub grad_x: f64,
    pub grad_y: f64,
}

/// Samples the field of `state` on a regular grid over the arena with
/// `spacing` meters between nodes; rows are ordered by `y`, then `x`.
pub fn field_grid(state: &EpisodeState, config: &ScenarioConfig, spacing: f64) -> Result<Vec<GridRow>> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidParameter(format!("grid spacing {spacing}")));
    }
    let field = build_field(state, config)?;
    let nx = (config.arena_width / spacing).floor() as usize + 1;
    let ny = (config.arena_length / spacing).floor() as usize + 1;
    let mut rows = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let q = Vec2::new(i as f64 * spacing, j as f64 * spacing);
            let g = field.gradient(q);
            rows.push(GridRow {
                x: q.x,
                y: q.y,
                phi: field.intensity(q),
                grad_x: g.x,
                grad_y: g.y,
            });
        }
    }
    Ok(rows)
}

pub fn write_field_grid(path: impl AsRef<Path>, rows: &[GridRow]) -> Result<()> {
    write_serialized(path.as_ref(), &FIELD_GRID_HEADER, rows)
}

/// Writes `field_grid.csv` for the initial state of evaluation episode 0,
/// the resolved `scenario.toml` and `manifest.toml`.
pub fn export_field_grid(run: &RunConfig, out_dir: &Path, spacing: f64) -> Result<Vec<GridRow>> {
    run.validate()?;
    ensure_dir(out_dir)?;
    let mut cfg = run.scenario.clone();
    cfg.seed = run.eval_seed(0);
    let state = reset(&cfg)?;
    let rows = field_grid(&state, &cfg, spacing)?;
    write_field_grid(out_dir.join("field_grid.csv"), &rows)?;
    let path = out_dir.join("scenario.toml");
    std::fs::write(&path, cfg.to_toml_string()).map_err(|e| Error::io(&path, e))?;
    write_manifest(out_dir, "export", run, &["field_grid.csv", "scenario.toml"])?;
    Ok(rows)
}

#[derive(Serialize)]
struct Manifest<'a> {
    mode: &'a str,
    version: &'a str,
    outputs: &'a [&'a str],
    run: &'a RunConfig,
}

/// `manifest.toml`: mode, crate version, output files and the resolved run
/// configuration.
pub fn write_manifest(out_dir: &Path, mode: &str, run: &RunConfig, outputs: &[&str]) -> Result<()> {
    let m = Manifest {
        mode,
        version: env!("CARGO_PKG_VERSION"),
        outputs,
        run,
    };
    let text = toml::to_string(&m).map_err(|e| Error::Config(e.to_string()))?;
    let path = out_dir.join("manifest.toml");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}
