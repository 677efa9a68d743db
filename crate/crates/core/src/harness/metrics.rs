//! Per-episode records and their CSV schemas.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back reproduces the in-memory values exactly.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const METRICS_HEADER: [&str; 11] = [
    "episode",
    "seed",
    "steps",
    "outcome",
    "success",
    "return_total",
    "return_swarming",
    "min_d_u2o",
    "min_d_u2u",
    "energy_mean",
    "energies",
];

/// One episode. Returns are per-UAV sums over the steps a UAV acted,
/// averaged over UAVs; distances are minima over the episode (`inf` when no
/// pair existed); energies are the curvature energy of each UAV's path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub episode: usize,
    pub seed: u64,
    pub steps: usize,
    pub outcome: String,
    pub success: bool,
    pub return_total: f64,
    pub return_swarming: f64,
    pub min_d_u2o: f64,
    pub min_d_u2u: f64,
    pub energies: Vec<f64>,
}

impl MetricsRecord {
    pub fn energy_mean(&self) -> f64 {
        if self.energies.is_empty() {
            0.0
        } else {
            self.energies.iter().sum::<f64>() / self.energies.len() as f64
        }
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.episode.to_string(),
            self.seed.to_string(),
            self.steps.to_string(),
            self.outcome.clone(),
            u8::from(self.success).to_string(),
            self.return_total.to_string(),
            self.return_swarming.to_string(),
            self.min_d_u2o.to_string(),
            self.min_d_u2u.to_string(),
            self.energy_mean().to_string(),
            self.energies.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
        ]
    }

    fn from_fields(rec: &csv::StringRecord) -> Result<Self> {
        let bad = |col: &str| Error::Config(format!("metrics CSV: bad value in column {col}"));
        let get = |k: usize| rec.get(k).ok_or_else(|| bad(METRICS_HEADER[k]));
        let num = |k: usize| -> Result<f64> { get(k)?.parse::<f64>().map_err(|_| bad(METRICS_HEADER[k])) };
        let energies = get(10)?;
        Ok(Self {
            episode: get(0)?.parse().map_err(|_| bad("episode"))?,
            seed: get(1)?.parse().map_err(|_| bad("seed"))?,
            steps: get(2)?.parse().map_err(|_| bad("steps"))?,
            outcome: get(3)?.to_string(),
            success: get(4)? == "1",
            return_total: num(5)?,
            return_swarming: num(6)?,
            min_d_u2o: num(7)?,
            min_d_u2u: num(8)?,
            energies: if energies.is_empty() {
                Vec::new()
            } else {
                energies
                    .split(';')
                    .map(|v| v.parse().map_err(|_| bad("energies")))
                    .collect::<Result<_>>()?
            },
        })
    }
}

pub fn write_metrics<W: Write>(w: W, records: &[MetricsRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(METRICS_HEADER)?;
    for r in records {
        wtr.write_record(r.to_fields())?;
    }
    wtr.flush().map_err(|e| Error::io("<metrics csv>", e))
}

pub fn write_metrics_csv(path: impl AsRef<Path>, records: &[MetricsRecord]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_metrics(f, records)
}

pub fn read_metrics<R: Read>(r: R) -> Result<Vec<MetricsRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(METRICS_HEADER.iter().copied()) {
        return Err(Error::Config(format!("metrics CSV header mismatch: {header:?}")));
    }
    rdr.records().map(|rec| MetricsRecord::from_fields(&rec?)).collect()
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRecord>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_metrics(f)
}

pub const LATENCY_HEADER: [&str; 4] = ["episode", "decisions", "reaction_time_mean", "reaction_time_std"];

/// Per-episode decision latency in seconds (policy forward pass or one
/// planner call).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub episode: usize,
    pub decisions: usize,
    pub reaction_time_mean: f64,
    pub reaction_time_std: f64,
}

pub fn write_latency_csv(path: impl AsRef<Path>, rows: &[LatencyRow]) -> Result<()> {
    write_serialized(path.as_ref(), &LATENCY_HEADER, rows)
}

pub const Q_HEADER: [&str; 5] = ["episode", "step", "uav", "action", "q"];

/// Action value of the action a UAV took, from its own critic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QRow {
    pub episode: usize,
    pub step: usize,
    pub uav: usize,
    pub action: f64,
    pub q: f64,
}

pub fn write_q_csv(path: impl AsRef<Path>, rows: &[QRow]) -> Result<()> {
    write_serialized(path.as_ref(), &Q_HEADER, rows)
}

pub(crate) fn write_serialized<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(f);
    wtr.write_record(header)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                n,
            };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        Self {
            mean,
            std: var.sqrt(),
            n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize) -> MetricsRecord {
        MetricsRecord {
            episode: k,
            seed: 99 + k as u64,
            steps: 64,
            outcome: "success".into(),
            success: true,
            return_total: 0.1 + k as f64 / 3.0,
            return_swarming: 63.25,
            min_d_u2o: 41.5,
            min_d_u2u: f64::INFINITY,
            energies: vec![0.0, 1.0 / 7.0],
        }
    }

    #[test]
    fn metrics_round_trip_exactly() {
        let rows: Vec<_> = (0..3).map(rec).collect();
        let mut buf = Vec::new();
        write_metrics(&mut buf, &rows).unwrap();
        let back = read_metrics(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("episode,seed,steps,outcome,success,return_total"));
    }

    #[test]
    fn header_mismatch_is_reported() {
        assert!(read_metrics("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn summary_stats() {
        let s = Summary::of([1.0, 3.0]);
        assert_eq!((s.mean, s.std, s.n), (2.0, 1.0, 2));
        assert!(Summary::of([]).mean.is_nan());
    }
}
