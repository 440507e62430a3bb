//! Run summaries, energy traces and bench tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use aclbf_core::iglim::IglimDiagnostics;
use aclbf_core::{EnergyRecord, RunConfig, RunResult, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OverlayFormat {
    #[default]
    Ppm,
    Png,
}

impl OverlayFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            OverlayFormat::Ppm => "overlay.ppm",
            OverlayFormat::Png => "overlay.png",
        }
    }
}

/// Contents of `run.json`. `input`, `config` and `overlay_format` are enough
/// to replay the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub input: PathBuf,
    pub config: RunConfig,
    pub overlay_format: OverlayFormat,
    pub iterations: usize,
    pub converged: bool,
    pub final_energy: f64,
    pub iglim: Option<IglimDiagnostics>,
    pub energy_violations: usize,
    pub guarded_pixels: usize,
    pub wall_ms: f64,
}

impl RunSummary {
    pub fn new(
        input: &Path,
        config: RunConfig,
        overlay_format: OverlayFormat,
        result: &RunResult,
        wall_ms: f64,
    ) -> Self {
        Self {
            input: input.to_path_buf(),
            config,
            overlay_format,
            iterations: result.iterations,
            converged: result.converged,
            final_energy: result.trace.last().map_or(f64::NAN, |r| r.energy),
            iglim: result.iglim,
            energy_violations: result.energy_violations,
            guarded_pixels: result.guarded_pixels,
            wall_ms,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// `iter,energy,wall_ms` with full round-trip precision for the energy.
pub fn energy_csv(trace: &[EnergyRecord]) -> String {
    let mut out = String::from("iter,energy,wall_ms\n");
    for r in trace {
        writeln!(out, "{},{:e},{:.3}", r.iter, r.energy, r.wall_ms).expect("write to string");
    }
    out
}

/// Parses an energy CSV back into `(iter, energy)` pairs.
pub fn parse_energy_csv(text: &str) -> Option<Vec<(usize, f64)>> {
    let mut lines = text.lines();
    if lines.next()? != "iter,energy,wall_ms" {
        return None;
    }
    lines
        .map(|l| {
            let mut f = l.split(',');
            Some((f.next()?.parse().ok()?, f.next()?.parse().ok()?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub fixture: String,
    pub scheme: Scheme,
    pub iters: Option<usize>,
    pub wall_ms: f64,
    pub dice: Option<f64>,
}

pub fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Etd1 => "etd1",
        Scheme::Etdrk2 => "etdrk2",
    }
}

/// `fixture,scheme,iters,wall_ms,dice`. Failed runs leave `iters` empty and
/// fixtures without ground truth leave `dice` empty.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("fixture,scheme,iters,wall_ms,dice\n");
    for r in rows {
        let iters = r.iters.map(|n| n.to_string()).unwrap_or_default();
        let dice = r.dice.map(|d| format!("{d:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{:.3},{}",
            r.fixture,
            scheme_name(r.scheme),
            iters,
            r.wall_ms,
            dice
        )
        .expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_csv_round_trips_bitwise() {
        let trace = [
            EnergyRecord {
                iter: 0,
                energy: 0.1 + 0.2,
                wall_ms: 0.0,
            },
            EnergyRecord {
                iter: 1,
                energy: -1.0 / 3.0,
                wall_ms: 1.25,
            },
        ];
        let text = energy_csv(&trace);
        assert!(text.starts_with("iter,energy,wall_ms\n"));
        let parsed = parse_energy_csv(&text).unwrap();
        assert_eq!(parsed, vec![(0, 0.1 + 0.2), (1, -1.0 / 3.0)]);
    }

    #[test]
    fn bench_csv_leaves_missing_fields_empty() {
        let rows = [BenchRow {
            fixture: "x".into(),
            scheme: Scheme::Etd1,
            iters: None,
            wall_ms: 2.0,
            dice: None,
        }];
        assert_eq!(
            bench_csv(&rows),
            "fixture,scheme,iters,wall_ms,dice\nx,etd1,,2.000,\n"
        );
    }
}
