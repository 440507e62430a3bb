//! Exponential time differencing for `U_t = −L_h U + N(U)` with the
//! stabilized operator `L_h = S·I − εD_h`.
//!
//! Every mode of `L_h` is `ℓ = S − ε d ≥ S > 0`, so the per-mode factors
//! `e^{−ℓΔt}`, `Δt φ₀(ℓΔt)` and `Δt φ₁(ℓΔt)` are precomputed once per
//! `(S, Δt)` and each step is a handful of cosine transforms.

use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::grid::{Dims, Field, PhaseField};
use crate::model::ModelParams;
use crate::spectral::{laplacian_eigenvalues, CosineTransform};

/// Below this argument the φ-functions switch to their Taylor series.
pub const PHI_SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiFactors {
    /// `e^{−z}`
    pub decay: f64,
    /// `φ₀(z) = (1 − e^{−z})/z`
    pub phi0: f64,
    /// `φ₁(z) = (z − 1 + e^{−z})/z²`
    pub phi1: f64,
}

pub fn phi_factors(z: f64) -> Result<PhiFactors> {
    if z.is_nan() || z <= 0.0 {
        return Err(invalid("z", "phi-functions need a positive argument"));
    }
    let decay = libm::exp(-z);
    let (phi0, phi1) = if z < PHI_SERIES_THRESHOLD {
        // 6-term Taylor series; the closed forms cancel catastrophically here
        let phi0 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0
            - z * z * z * z * z / 720.0;
        let phi1 = 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 + z * z * z * z / 720.0
            - z * z * z * z * z / 5040.0;
        (phi0, phi1)
    } else {
        let em1 = libm::expm1(-z);
        (-em1 / z, (z + em1) / (z * z))
    };
    Ok(PhiFactors { decay, phi0, phi1 })
}

/// Time discretization used by the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Scheme {
    Etd1,
    Etdrk2,
}

/// Per-mode factors of the stabilized linear operator for fixed `(S, Δt)`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    eigenvalues: Field,
    stabilizer: f64,
    eps: f64,
    dt: f64,
    decay: Field,
    p0: Field,
    p1: Field,
}

impl SpectralOperator {
    pub fn new(dims: Dims, h: f64, eps: f64, stabilizer: f64, dt: f64) -> Result<Self> {
        let eigenvalues = laplacian_eigenvalues(dims, h)?;
        Self::from_eigenvalues(eigenvalues, eps, stabilizer, dt)
    }

    /// Reuses an eigenvalue field (the stabilizer may change every iteration).
    pub fn from_eigenvalues(
        eigenvalues: Field,
        eps: f64,
        stabilizer: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(stabilizer > 0.0 && stabilizer.is_finite()) {
            return Err(Error::NonPositiveStabilizer(stabilizer));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid("eps", "must be positive and finite"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", "must be positive and finite"));
        }
        let dims = eigenvalues.dims();
        let mut decay = Field::zeros(dims);
        let mut p0 = Field::zeros(dims);
        let mut p1 = Field::zeros(dims);
        for (k, &d) in eigenvalues.as_slice().iter().enumerate() {
            let ell = stabilizer - eps * d;
            let f = phi_factors(ell * dt)?;
            decay.as_mut_slice()[k] = f.decay;
            p0.as_mut_slice()[k] = dt * f.phi0;
            p1.as_mut_slice()[k] = dt * f.phi1;
        }
        Ok(Self {
            eigenvalues,
            stabilizer,
            eps,
            dt,
            decay,
            p0,
            p1,
        })
    }

    pub fn dims(&self) -> Dims {
        self.eigenvalues.dims()
    }

    pub fn eigenvalues(&self) -> &Field {
        &self.eigenvalues
    }

    pub fn stabilizer(&self) -> f64 {
        self.stabilizer
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `e^{−ℓΔt}` per mode.
    pub fn decay(&self) -> &Field {
        &self.decay
    }

    /// `Δt·φ₀(ℓΔt)` per mode.
    pub fn p0(&self) -> &Field {
        &self.p0
    }

    /// `Δt·φ₁(ℓΔt)` per mode.
    pub fn p1(&self) -> &Field {
        &self.p1
    }
}

/// `U⁺ = e^{−L_hΔt}U + Δt φ₀(L_hΔt) N`.
pub fn etd1_step<T: CosineTransform + ?Sized>(
    u: &PhaseField,
    n: &Field,
    op: &SpectralOperator,
    dct: &T,
) -> PhaseField {
    let uh = dct.forward(u);
    let nh = dct.forward(n);
    let mut out = Field::zeros(u.dims());
    for (k, o) in out.as_mut_slice().iter_mut().enumerate() {
        *o = op.decay.as_slice()[k] * uh.as_slice()[k] + op.p0.as_slice()[k] * nh.as_slice()[k];
    }
    dct.inverse(&out)
}

/// Two-stage exponential Runge-Kutta step.
///
/// The predictor is an ETD1 step; the corrector adds
/// `Δt φ₁(L_hΔt)[N(Ũ) − N(U)]`. `nonlinear` evaluates `N` with whatever
/// coefficients the caller has frozen.
pub fn etdrk2_step<T, F>(
    u: &PhaseField,
    mut nonlinear: F,
    op: &SpectralOperator,
    dct: &T,
) -> PhaseField
where
    T: CosineTransform + ?Sized,
    F: FnMut(&PhaseField) -> Field,
{
    let uh = dct.forward(u);
    let nh = dct.forward(&nonlinear(u));
    let e = op.decay.as_slice();
    let p0 = op.p0.as_slice();
    let p1 = op.p1.as_slice();

    let mut base = Field::zeros(u.dims());
    for (k, b) in base.as_mut_slice().iter_mut().enumerate() {
        *b = e[k] * uh.as_slice()[k] + p0[k] * nh.as_slice()[k];
    }
    let predicted = dct.inverse(&base);
    let nph = dct.forward(&nonlinear(&predicted));
    for (k, b) in base.as_mut_slice().iter_mut().enumerate() {
        *b += p1[k] * (nph.as_slice()[k] - nh.as_slice()[k]);
    }
    dct.inverse(&base)
}

/// How the stabilizer `S` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "lowercase"))]
pub enum StabilizerPolicy {
    /// `S = G/2 + 1`, recomputed from the current forces.
    Auto,
    /// `S = c·μ·ε₁`.
    Table {
        multiplier: f64,
    },
    Fixed {
        value: f64,
    },
}

/// `G₁ = π²/(2ε) + 1`, a bound on `|W″|/ε`.
pub fn double_well_bound(eps: f64) -> f64 {
    PI * PI / (2.0 * eps) + 1.0
}

/// `G₂ = 3√3 μ / (8π ε₁²) · max|λ₁e₁ − λ₂e₂|`.
///
/// `|δ′_{ε₁}(U)| = (2ε₁/π)|U|/(ε₁² + U²)²` peaks at `U = ε₁/√3`, where it equals
/// `3√3/(8π ε₁²)`.
pub fn fitting_bound(e1: &Field, e2: &Field, p: &ModelParams) -> f64 {
    let peak = 3.0 * libm::sqrt(3.0) / (8.0 * PI * p.eps1 * p.eps1);
    let spread = e1
        .as_slice()
        .iter()
        .zip(e2.as_slice())
        .fold(0.0_f64, |m, (&a, &b)| {
            m.max((p.lambda1 * a - p.lambda2 * b).abs())
        });
    peak * p.mu * spread
}

/// `G = G₁ + G₂`, bounding the derivative of `SU − N(U)`.
pub fn derivative_bound(e1: &Field, e2: &Field, p: &ModelParams) -> f64 {
    double_well_bound(p.eps) + fitting_bound(e1, e2, p)
}

pub fn compute_stabilizer(
    e1: &Field,
    e2: &Field,
    p: &ModelParams,
    policy: StabilizerPolicy,
) -> Result<f64> {
    let s = match policy {
        StabilizerPolicy::Auto => derivative_bound(e1, e2, p) / 2.0 + 1.0,
        StabilizerPolicy::Table { multiplier } => multiplier * p.mu * p.eps1,
        StabilizerPolicy::Fixed { value } => value,
    };
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::NonPositiveStabilizer(s))
    }
}
