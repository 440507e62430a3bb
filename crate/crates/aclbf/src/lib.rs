//! Std companion to `aclbf-core`: raster IO, a rustdct-backed cosine
//! transform, synthetic fixtures, run reports and the `aclbf` command line.

pub mod bench;
pub mod cli;
pub mod dct;
pub mod error;
pub mod io;
pub mod report;
pub mod synth;

pub use dct::FastDct;
pub use error::{Error, Result};
