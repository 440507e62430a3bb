//! Synthetic images with known ground truth.
//!
//! Every generator paints a two-level image (object `fg`, background `bg`),
//! optionally adds a horizontal illumination ramp and Gaussian noise, and
//! quantizes to 8 bits so the result is exactly what a PGM round-trip yields.

use std::f64::consts::PI;

use aclbf_core::{Dims, LabelMask};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::io::{quantize, Gray8};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// Filled disk centred in the frame.
    Disk,
    /// Disk under a left-to-right illumination ramp.
    RampDisk,
    /// Sinuous tube with one straight branch, lit unevenly.
    Vessel,
    /// Left half object, right half background.
    Step,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Disk => "disk",
            Shape::RampDisk => "ramp-disk",
            Shape::Vessel => "vessel",
            Shape::Step => "step",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub shape: Shape,
    pub rows: usize,
    pub cols: usize,
    /// Disk radius in pixels.
    pub radius: f64,
    /// Object intensity in `[0, 1]`.
    pub fg: f64,
    /// Background intensity in `[0, 1]`.
    pub bg: f64,
    /// Intensity change across the full width, centred on zero.
    pub gradient: f64,
    /// Noise variance on the 0–255 scale.
    pub noise_var: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn new(shape: Shape, size: usize) -> Self {
        Self {
            shape,
            rows: size,
            cols: size,
            radius: size as f64 / 4.0,
            fg: 0.3,
            bg: 0.8,
            gradient: match shape {
                Shape::RampDisk => 0.4,
                Shape::Vessel => 0.2,
                _ => 0.0,
            },
            noise_var: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.rows < 3 || self.cols < 3 {
            return Err("size must be at least 3".into());
        }
        for (name, v) in [("fg", self.fg), ("bg", self.bg)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err("radius must be positive".into());
        }
        if !self.gradient.is_finite() {
            return Err("gradient must be finite".into());
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err("noise variance must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub image: Gray8,
    pub truth: LabelMask,
}

/// Ground-truth object mask.
pub fn truth_mask(params: &SynthParams) -> LabelMask {
    let d = Dims::new(params.rows, params.cols);
    let (ci, cj) = (
        (params.rows as f64 - 1.0) / 2.0,
        (params.cols as f64 - 1.0) / 2.0,
    );
    match params.shape {
        Shape::Disk | Shape::RampDisk => LabelMask::from_fn(d, |i, j| {
            let (y, x) = (i as f64 - ci, j as f64 - cj);
            y * y + x * x <= params.radius * params.radius
        }),
        Shape::Step => LabelMask::from_fn(d, |_, j| j < params.cols / 2),
        Shape::Vessel => LabelMask::from_fn(d, |i, j| {
            in_vessel(i as f64, j as f64, params.rows as f64, params.cols as f64)
        }),
    }
}

fn in_vessel(y: f64, x: f64, rows: f64, cols: f64) -> bool {
    let centre = |x: f64| 0.5 * rows + 0.18 * rows * (2.0 * PI * x / cols).sin();
    let trunk = (y - centre(x)).abs() <= 0.035 * rows;
    // branch leaves the trunk at 30% of the width and climbs to the upper edge
    let x0 = 0.3 * cols;
    let t = x - x0;
    let branch =
        (0.0..=0.35 * cols).contains(&t) && (y - (centre(x0) - 0.9 * t)).abs() <= 0.025 * rows;
    trunk || branch
}

pub fn generate(params: &SynthParams) -> Fixture {
    let truth = truth_mask(params);
    let d = truth.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = (params.noise_var > 0.0)
        .then(|| Normal::new(0.0, params.noise_var.sqrt() / 255.0).expect("finite std"));
    let span = (params.cols.max(2) - 1) as f64;
    let image = Gray8::from_fn(d, |i, j| {
        let mut v = if truth.get(i, j) {
            params.fg
        } else {
            params.bg
        };
        v += params.gradient * (j as f64 / span - 0.5);
        if let Some(n) = &noise {
            v += n.sample(&mut rng);
        }
        quantize(v)
    });
    Fixture {
        name: params.shape.name().to_string(),
        image,
        truth,
    }
}

/// Noise-free disk, ramp-lit disk, noisy disk (variance 300) and the vessel
/// tube, all 100×100.
pub fn suite() -> Vec<Fixture> {
    let mut noisy = SynthParams::new(Shape::Disk, 100);
    noisy.noise_var = 300.0;
    noisy.seed = 7;
    let specs = [
        ("disk", SynthParams::new(Shape::Disk, 100)),
        ("ramp-disk", SynthParams::new(Shape::RampDisk, 100)),
        ("noisy-disk", noisy),
        ("vessel", SynthParams::new(Shape::Vessel, 100)),
    ];
    specs
        .into_iter()
        .map(|(name, s)| Fixture {
            name: name.to_string(),
            ..generate(&s)
        })
        .collect()
}
