//! Terms of the Allen-Cahn local binary fitting energy.
//!
//! The double-well is `W(u) = sin²(π(u+1)/2)`, so `W′(u) = (π/2) sin(π(u+1))`
//! and `W″(u) = (π²/2) cos(π(u+1))`. The Heaviside is smoothed with width
//! `ε₁` and its derivative is the matching Cauchy-type delta.

use core::f64::consts::{FRAC_1_PI, FRAC_PI_2, PI};

use crate::error::{invalid, Result};
use crate::grid::{Field, GrayImage, PhaseField};
use crate::kernel::GaussianKernel;

/// Floor applied to the fitting denominators `K ∗ H(u)` and `K ∗ (1 − H(u))`.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// Diffuse-interface width ε.
    pub eps: f64,
    /// Heaviside smoothing width ε₁.
    pub eps1: f64,
    /// Fitting strength μ. Forces scale with the squared intensity range,
    /// so μ must be large on the `[0, 1]` scale to compete with `ε/h²`.
    pub mu: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Gaussian kernel standard deviation σ, in pixels.
    pub sigma: f64,
    /// Pixel spacing h.
    pub h: f64,
    /// Time step Δt.
    pub dt: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            eps: 0.5,
            eps1: 0.5,
            mu: 4.0e4,
            lambda1: 1.0,
            lambda2: 1.0,
            sigma: 3.0,
            h: 0.01,
            dt: 0.1,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps", self.eps),
            ("eps1", self.eps1),
            ("sigma", self.sigma),
            ("h", self.h),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        let nonneg = [
            ("mu", self.mu),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be non-negative and finite"));
            }
        }
        Ok(())
    }
}

#[inline]
pub fn heaviside(x: f64, eps1: f64) -> f64 {
    0.5 * (1.0 + 2.0 * FRAC_1_PI * libm::atan(x / eps1))
}

#[inline]
pub fn delta(x: f64, eps1: f64) -> f64 {
    FRAC_1_PI * eps1 / (eps1 * eps1 + x * x)
}

/// Derivative of [`delta`]: `−(2ε₁/π) x / (ε₁² + x²)²`.
#[inline]
pub fn delta_prime(x: f64, eps1: f64) -> f64 {
    let q = eps1 * eps1 + x * x;
    -2.0 * eps1 * FRAC_1_PI * x / (q * q)
}

#[inline]
pub fn double_well(u: f64) -> f64 {
    let s = libm::sin(FRAC_PI_2 * (u + 1.0));
    s * s
}

#[inline]
pub fn double_well_prime(u: f64) -> f64 {
    FRAC_PI_2 * libm::sin(PI * (u + 1.0))
}

#[inline]
pub fn double_well_second(u: f64) -> f64 {
    0.5 * PI * PI * libm::cos(PI * (u + 1.0))
}

/// Local fits and the forces they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct FitPair {
    pub f1: Field,
    pub f2: Field,
    pub e1: Field,
    pub e2: Field,
    /// Pixels where a fitting denominator hit [`DENOMINATOR_GUARD`].
    pub guarded: usize,
}

/// `f₁ = K∗[H(u)I] / K∗H(u)` and `f₂ = K∗[(1−H(u))I] / K∗(1−H(u))`.
///
/// Returns the two fits and the number of guarded denominators.
pub fn fit_functions(
    image: &GrayImage,
    u: &PhaseField,
    kernel: &GaussianKernel,
    eps1: f64,
) -> Result<(Field, Field, usize)> {
    image.dims().check_same(u.dims(), "fit_functions")?;
    let img = image.field();
    let h = u.map(|v| heaviside(v, eps1));
    let hc = h.map(|v| 1.0 - v);
    let num1 = kernel.convolve(&h.zip_map(img, |a, b| a * b));
    let num2 = kernel.convolve(&hc.zip_map(img, |a, b| a * b));
    let den1 = kernel.convolve(&h);
    let den2 = kernel.convolve(&hc);
    let quotient = |n: &Field, d: &Field| {
        n.zip_map(d, |a, b| {
            if b < DENOMINATOR_GUARD {
                a / DENOMINATOR_GUARD
            } else {
                a / b
            }
        })
    };
    let f1 = quotient(&num1, &den1);
    let f2 = quotient(&num2, &den2);
    let guarded = den1
        .as_slice()
        .iter()
        .chain(den2.as_slice())
        .filter(|&&b| b < DENOMINATOR_GUARD)
        .count();
    Ok((f1, f2, guarded))
}

/// `e = K∗f² − 2I(K∗f) + I²(K∗1_Ω)`, clamped at zero from below.
pub fn force_field(image: &GrayImage, fit: &Field, kernel: &GaussianKernel, mass: &Field) -> Field {
    let img = image.field().as_slice();
    let kf2 = kernel.convolve(&fit.map(|v| v * v));
    let kf = kernel.convolve(fit);
    let data = img
        .iter()
        .zip(kf2.as_slice())
        .zip(kf.as_slice())
        .zip(mass.as_slice())
        .map(|(((&i, &a), &b), &m)| (a - 2.0 * i * b + i * i * m).max(0.0))
        .collect();
    Field::from_vec(fit.dims(), data).expect("matching dims")
}

/// `(e₁, e₂)` for a pair of fits.
pub fn force_fields(
    image: &GrayImage,
    f1: &Field,
    f2: &Field,
    kernel: &GaussianKernel,
    mass: &Field,
) -> Result<(Field, Field)> {
    let d = image.dims();
    d.check_same(f1.dims(), "force_fields f1")?;
    d.check_same(f2.dims(), "force_fields f2")?;
    d.check_same(mass.dims(), "force_fields mass")?;
    Ok((
        force_field(image, f1, kernel, mass),
        force_field(image, f2, kernel, mass),
    ))
}

/// Caches the kernel and its in-domain mass for one image size.
#[derive(Debug, Clone)]
pub struct FittingContext {
    pub kernel: GaussianKernel,
    pub mass: Field,
    pub eps1: f64,
}

impl FittingContext {
    pub fn new(image: &GrayImage, sigma: f64, eps1: f64) -> Result<Self> {
        let kernel = GaussianKernel::new(sigma)?;
        let mass = kernel.mass(image.dims());
        Ok(Self { kernel, mass, eps1 })
    }

    /// Fits at `u` followed by the forces they induce.
    pub fn fit(&self, image: &GrayImage, u: &PhaseField) -> Result<FitPair> {
        let (f1, f2, guarded) = fit_functions(image, u, &self.kernel, self.eps1)?;
        let (e1, e2) = force_fields(image, &f1, &f2, &self.kernel, &self.mass)?;
        Ok(FitPair {
            f1,
            f2,
            e1,
            e2,
            guarded,
        })
    }
}

/// `N(U) = SU − W′(U)/ε − μ δ_{ε₁}(U)(λ₁e₁ − λ₂e₂)`, pointwise.
pub fn nonlinear_term(u: &PhaseField, e1: &Field, e2: &Field, s: f64, p: &ModelParams) -> Field {
    let data = u
        .as_slice()
        .iter()
        .zip(e1.as_slice())
        .zip(e2.as_slice())
        .map(|((&v, &a), &b)| {
            s * v
                - double_well_prime(v) / p.eps
                - p.mu * delta(v, p.eps1) * (p.lambda1 * a - p.lambda2 * b)
        })
        .collect();
    Field::from_vec(u.dims(), data).expect("matching dims")
}

/// `Σ_edges (U_a − U_b)²` over horizontally and vertically adjacent pixels,
/// which equals `−h² UᵀD_hU` for the Neumann Laplacian.
pub fn neumann_dirichlet_sum(u: &Field) -> f64 {
    let d = u.dims();
    let s = u.as_slice();
    let mut acc = 0.0;
    for j in 0..d.cols {
        for i in 0..d.rows {
            let v = s[d.index(i, j)];
            if i + 1 < d.rows {
                let w = s[d.index(i + 1, j)];
                acc += (v - w) * (v - w);
            }
            if j + 1 < d.cols {
                let w = s[d.index(i, j + 1)];
                acc += (v - w) * (v - w);
            }
        }
    }
    acc
}

/// Discrete energy
/// `E_h = Σ W(U)/ε + μ Σ [λ₁H(U)e₁ + λ₂(1−H(U))e₂] − (ε/2) UᵀD_hU`.
pub fn discrete_energy(u: &PhaseField, e1: &Field, e2: &Field, p: &ModelParams) -> f64 {
    let mut bulk = 0.0;
    let mut fitting = 0.0;
    for ((&v, &a), &b) in u.as_slice().iter().zip(e1.as_slice()).zip(e2.as_slice()) {
        bulk += double_well(v);
        let hv = heaviside(v, p.eps1);
        fitting += p.lambda1 * hv * a + p.lambda2 * (1.0 - hv) * b;
    }
    let gradient = 0.5 * p.eps * neumann_dirichlet_sum(u) / (p.h * p.h);
    bulk / p.eps + p.mu * fitting + gradient
}
