//! Two-phase image segmentation with the Allen-Cahn local binary fitting
//! model.
//!
//! The crate is `no_std` and needs only `alloc`. Modules, bottom-up:
//!
//! - [`grid`]: fields, images, masks and the column-major flattening
//! - [`kernel`]: truncated Gaussian kernel and zero-padded convolution
//! - [`iglim`]: graph-Laplacian edge detection that yields the initial field
//! - [`model`]: smoothed Heaviside/delta, local fits, forces and the energy
//! - [`spectral`]: Neumann Laplacian spectrum and cosine transforms
//! - [`etd`]: φ-functions, stabilizer choice and the ETD1/ETDRK2 steps
//! - [`driver`]: the alternating minimization loop
//!
//! Intensities are expected in `[0, 1]`; the default parameters (graph
//! weight λ = 50, thresholds k₁ = k₂ = 0.01) only make sense at that scale.

#![no_std]

extern crate alloc;

pub mod driver;
pub mod error;
pub mod etd;
pub mod grid;
pub mod iglim;
pub mod kernel;
pub mod model;
pub mod spectral;

pub use driver::{binarize, dice, evolve, segment, EnergyRecord, RunConfig, RunResult};
pub use error::{Error, Result};
pub use etd::{Scheme, SpectralOperator, StabilizerPolicy};
pub use grid::{Dims, Field, GrayImage, LabelMask, PhaseField, PixelSet};
pub use iglim::{IglimParams, Polarity, SidePolicy};
pub use kernel::GaussianKernel;
pub use model::{FitPair, ModelParams};
pub use spectral::{CosineTransform, MatrixDct};
