//! Both schemes over a fixture set, one row per fixture and scheme.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aclbf_core::{dice, segment, GrayImage, LabelMask, ModelParams, RunConfig, RunResult, Scheme};

use crate::dct::FastDct;
use crate::error::{Error, Result};
use crate::io::{load_gray, read_mask};
use crate::report::{scheme_name, BenchRow};
use crate::synth::Fixture;

/// Parameters the bundled fixtures are tuned for: stronger fitting and a
/// wider Heaviside than the library defaults, which halves iteration counts
/// and keeps the noisy disk robust across seeds.
pub fn suite_config() -> RunConfig {
    RunConfig {
        model: ModelParams {
            mu: 1.5e5,
            eps1: 1.0,
            sigma: 3.0,
            ..ModelParams::default()
        },
        ..RunConfig::default()
    }
}

/// A fixture read from disk; `truth` is present when `<stem>_truth.pgm` exists.
#[derive(Debug, Clone)]
pub struct LoadedFixture {
    pub name: String,
    pub image: GrayImage,
    pub truth: Option<LabelMask>,
}

impl From<&Fixture> for LoadedFixture {
    fn from(f: &Fixture) -> Self {
        Self {
            name: f.name.clone(),
            image: f.image.to_image().expect("generated samples are valid"),
            truth: Some(f.truth.clone()),
        }
    }
}

/// Image files (`.pgm`, `.png`) in `dir`, excluding `*_truth.*`, sorted by name.
pub fn fixture_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        if matches!(ext.as_deref(), Some("pgm" | "png"))
            && !stem.ends_with("_truth")
            && path.is_file()
        {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_fixture(path: &Path) -> Result<LoadedFixture> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let image = load_gray(path)?;
    let truth_path = path.with_file_name(format!("{name}_truth.pgm"));
    let truth = if truth_path.is_file() {
        let t = read_mask(&truth_path)?;
        if t.dims() != image.dims() {
            return Err(Error::format(
                &truth_path,
                "ground truth size differs from the image",
            ));
        }
        Some(t)
    } else {
        None
    };
    Ok(LoadedFixture { name, image, truth })
}

/// Segments one fixture and returns the result with its wall time.
pub fn run_one(image: &GrayImage, cfg: &RunConfig) -> Result<(RunResult, f64)> {
    let dct = FastDct::new(image.dims());
    let start = Instant::now();
    let result = segment(image, cfg, &dct, || start.elapsed().as_secs_f64() * 1e3)?;
    Ok((result, start.elapsed().as_secs_f64() * 1e3))
}

/// ETD1 then ETDRK2 on one fixture. Failures become rows without `iters`
/// and are reported through `log`.
pub fn bench_fixture(
    fixture: &LoadedFixture,
    base: &RunConfig,
    log: &mut dyn FnMut(String),
) -> Vec<BenchRow> {
    [Scheme::Etd1, Scheme::Etdrk2]
        .into_iter()
        .map(|scheme| {
            let cfg = RunConfig { scheme, ..*base };
            match run_one(&fixture.image, &cfg) {
                Ok((r, wall_ms)) => {
                    if !r.converged {
                        log(format!(
                            "{} {}: no convergence after {} iterations",
                            fixture.name,
                            scheme_name(scheme),
                            r.iterations
                        ));
                    }
                    BenchRow {
                        fixture: fixture.name.clone(),
                        scheme,
                        iters: Some(r.iterations),
                        wall_ms,
                        dice: fixture
                            .truth
                            .as_ref()
                            .map(|t| dice(&r.mask, t).expect("same dims")),
                    }
                }
                Err(e) => {
                    log(format!("{} {}: {e}", fixture.name, scheme_name(scheme)));
                    BenchRow {
                        fixture: fixture.name.clone(),
                        scheme,
                        iters: None,
                        wall_ms: 0.0,
                        dice: None,
                    }
                }
            }
        })
        .collect()
}
