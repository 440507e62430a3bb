//! Truncated Gaussian kernel and zero-padded convolution.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::grid::{Dims, Field};

/// `K_σ(x) = exp(−|x|²/(2σ²)) / (2πσ²)` sampled at integer offsets within
/// `[−r, r]²`. The truncated window is deliberately not renormalized: the
/// fitting quotients divide by `K_σ ∗ H(u)` and the force expansion carries
/// `K_σ ∗ 1_Ω`, so the missing tail mass cancels.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    radius: usize,
    scale: f64,
    /// Unnormalized 1-D profile `exp(−d²/(2σ²))` for `d = −r..=r`.
    profile: Vec<f64>,
}

impl GaussianKernel {
    /// Kernel with the default truncation radius `ceil(4σ)`.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", "must be positive and finite"));
        }
        let radius = libm::ceil(4.0 * sigma) as usize;
        Self::with_radius(sigma, radius.max(1))
    }

    /// Kernel with an explicit truncation radius (`0` keeps only the centre tap).
    pub fn with_radius(sigma: f64, radius: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", "must be positive and finite"));
        }
        let two_var = 2.0 * sigma * sigma;
        let r = radius as isize;
        let profile = (-r..=r)
            .map(|d| libm::exp(-((d * d) as f64) / two_var))
            .collect();
        Ok(Self {
            sigma,
            radius,
            scale: 1.0 / (2.0 * PI * sigma * sigma),
            profile,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Side length `2r + 1` of the square window.
    pub fn width(&self) -> usize {
        2 * self.radius + 1
    }

    /// Weight at offset `(di, dj)`; zero outside the window.
    pub fn weight(&self, di: isize, dj: isize) -> f64 {
        let r = self.radius as isize;
        if di.abs() > r || dj.abs() > r {
            return 0.0;
        }
        self.scale * self.profile[(di + r) as usize] * self.profile[(dj + r) as usize]
    }

    /// The full `(2r+1)²` weight array, row offset major.
    pub fn weights(&self) -> Vec<f64> {
        let r = self.radius as isize;
        let mut w = Vec::with_capacity(self.width() * self.width());
        for di in -r..=r {
            for dj in -r..=r {
                w.push(self.weight(di, dj));
            }
        }
        w
    }

    /// Sum of all truncated weights.
    pub fn total_mass(&self) -> f64 {
        let s: f64 = self.profile.iter().sum();
        self.scale * s * s
    }

    /// Zero-padded convolution `K_σ ∗ field`, evaluated as a column pass
    /// followed by a row pass. Output has the input's dimensions.
    pub fn convolve(&self, field: &Field) -> Field {
        let dims = field.dims();
        let src = field.as_slice();
        let r = self.radius as isize;
        let (rows, cols) = (dims.rows as isize, dims.cols as isize);

        // along i (contiguous in memory)
        let mut tmp = vec![0.0; dims.len()];
        for j in 0..cols {
            let col = &src[(j * rows) as usize..((j + 1) * rows) as usize];
            let out = &mut tmp[(j * rows) as usize..((j + 1) * rows) as usize];
            for i in 0..rows {
                let lo = (i - r).max(0);
                let hi = (i + r).min(rows - 1);
                let mut acc = 0.0;
                for y in lo..=hi {
                    acc += self.profile[(y - i + r) as usize] * col[y as usize];
                }
                out[i as usize] = acc;
            }
        }

        // along j
        let mut out = vec![0.0; dims.len()];
        for j in 0..cols {
            let lo = (j - r).max(0);
            let hi = (j + r).min(cols - 1);
            let dst = &mut out[(j * rows) as usize..((j + 1) * rows) as usize];
            for y in lo..=hi {
                let w = self.scale * self.profile[(y - j + r) as usize];
                let col = &tmp[(y * rows) as usize..((y + 1) * rows) as usize];
                for (d, &s) in dst.iter_mut().zip(col) {
                    *d += w * s;
                }
            }
        }
        Field::from_vec(dims, out).expect("length preserved")
    }

    /// `K_σ ∗ 1_Ω`: the kernel mass that falls inside the image at each pixel.
    pub fn mass(&self, dims: Dims) -> Field {
        self.convolve(&Field::constant(dims, 1.0))
    }
}
