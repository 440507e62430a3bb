//! Alternating minimization: refit `f₁, f₂` at the current phase field, then
//! take one ETD step with the fits frozen, until the binarized contour stops
//! moving.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::etd::{
    compute_stabilizer, etd1_step, etdrk2_step, Scheme, SpectralOperator, StabilizerPolicy,
};
use crate::grid::{Field, GrayImage, LabelMask, PhaseField};
use crate::iglim::{self, IglimDiagnostics, IglimParams};
use crate::model::{discrete_energy, nonlinear_term, FittingContext, ModelParams};
use crate::spectral::{laplacian_eigenvalues, CosineTransform};

/// Relative per-step tolerance on the ETD1 energy trace.
pub const ETD1_ENERGY_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunConfig {
    pub model: ModelParams,
    pub iglim: IglimParams,
    pub scheme: Scheme,
    pub stabilizer: StabilizerPolicy,
    pub max_iters: usize,
    /// Absolute energy increase tolerated per ETDRK2 step.
    pub rk2_slack: f64,
    /// Turn an energy increase beyond tolerance into an error.
    pub strict_energy: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            iglim: IglimParams::default(),
            scheme: Scheme::Etdrk2,
            stabilizer: StabilizerPolicy::Auto,
            max_iters: 500,
            rk2_slack: 1e-4,
            strict_energy: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.iglim.validate()?;
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if !(self.rk2_slack >= 0.0 && self.rk2_slack.is_finite()) {
            return Err(invalid("rk2_slack", "must be non-negative and finite"));
        }
        match self.stabilizer {
            StabilizerPolicy::Table { multiplier }
                if !(multiplier > 0.0 && multiplier.is_finite()) =>
            {
                Err(invalid("stabilizer", "table multiplier must be positive"))
            }
            StabilizerPolicy::Fixed { value } if !(value > 0.0 && value.is_finite()) => {
                Err(invalid("stabilizer", "fixed value must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Largest energy increase accepted when going from `previous`.
    pub fn energy_tolerance(&self, previous: f64) -> f64 {
        match self.scheme {
            Scheme::Etd1 => ETD1_ENERGY_RTOL * previous.abs(),
            Scheme::Etdrk2 => self.rk2_slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyRecord {
    pub iter: usize,
    pub energy: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub u: PhaseField,
    pub mask: LabelMask,
    pub iterations: usize,
    pub converged: bool,
    /// Initial energy followed by one record per iteration.
    pub trace: Vec<EnergyRecord>,
    pub iglim: Option<IglimDiagnostics>,
    /// Stabilizer used at each iteration.
    pub stabilizers: Vec<f64>,
    /// Steps whose energy rose beyond tolerance (only counted when not strict).
    pub energy_violations: usize,
    /// Guarded fitting denominators summed over all fits.
    pub guarded_pixels: usize,
}

/// Object label wherever `u > 0`.
pub fn binarize(u: &PhaseField) -> LabelMask {
    let d = u.dims();
    LabelMask::new(d, u.as_slice().iter().map(|&v| v > 0.0).collect()).expect("same length")
}

/// `2|A∩B| / (|A| + |B|)`, and 1 when both masks are empty.
pub fn dice(a: &LabelMask, b: &LabelMask) -> Result<f64> {
    a.dims().check_same(b.dims(), "dice")?;
    let (mut both, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        both += usize::from(x && y);
        na += usize::from(x);
        nb += usize::from(y);
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}

/// IGLIM initialization followed by [`evolve`]. `clock` returns elapsed
/// milliseconds and only feeds the energy trace.
pub fn segment<T, C>(image: &GrayImage, cfg: &RunConfig, dct: &T, clock: C) -> Result<RunResult>
where
    T: CosineTransform + ?Sized,
    C: FnMut() -> f64,
{
    cfg.validate()?;
    let init = iglim::run(image, &cfg.iglim)?;
    let mut result = evolve(image, init.u0.clone(), cfg, dct, clock)?;
    result.iglim = Some(init.diagnostics());
    Ok(result)
}

/// Runs the alternating minimization from a given initial field.
pub fn evolve<T, C>(
    image: &GrayImage,
    u0: PhaseField,
    cfg: &RunConfig,
    dct: &T,
    mut clock: C,
) -> Result<RunResult>
where
    T: CosineTransform + ?Sized,
    C: FnMut() -> f64,
{
    cfg.validate()?;
    let dims = image.dims();
    dims.check_same(u0.dims(), "initial field")?;
    dims.check_same(dct.dims(), "cosine transform")?;
    let p = &cfg.model;
    let ctx = FittingContext::new(image, p.sigma, p.eps1)?;
    let eigenvalues = laplacian_eigenvalues(dims, p.h)?;

    let mut u = u0;
    let mut mask = binarize(&u);
    let mut fit = ctx.fit(image, &u)?;
    let mut guarded_pixels = fit.guarded;
    let mut trace = Vec::new();
    trace.push(EnergyRecord {
        iter: 0,
        energy: discrete_energy(&u, &fit.e1, &fit.e2, p),
        wall_ms: clock(),
    });

    let mut op: Option<SpectralOperator> = None;
    let mut stabilizers = Vec::new();
    let mut energy_violations = 0;
    let mut iterations = 0;
    let mut converged = false;

    for n in 0..cfg.max_iters {
        if n > 0 {
            fit = ctx.fit(image, &u)?;
            guarded_pixels += fit.guarded;
        }
        let rebuild = op.is_none() || matches!(cfg.stabilizer, StabilizerPolicy::Auto);
        if rebuild {
            let s = compute_stabilizer(&fit.e1, &fit.e2, p, cfg.stabilizer)?;
            op = Some(SpectralOperator::from_eigenvalues(
                eigenvalues.clone(),
                p.eps,
                s,
                p.dt,
            )?);
        }
        let op_ref = op.as_ref().expect("operator built above");
        let s = op_ref.stabilizer();
        stabilizers.push(s);

        let next = match cfg.scheme {
            Scheme::Etd1 => {
                let nl = nonlinear_term(&u, &fit.e1, &fit.e2, s, p);
                etd1_step(&u, &nl, op_ref, dct)
            }
            Scheme::Etdrk2 => etdrk2_step(
                &u,
                |v: &Field| nonlinear_term(v, &fit.e1, &fit.e2, s, p),
                op_ref,
                dct,
            ),
        };
        if !next.is_finite() {
            return Err(Error::NonFinite { iteration: n + 1 });
        }

        let energy = discrete_energy(&next, &fit.e1, &fit.e2, p);
        let previous = trace.last().expect("initial record").energy;
        if energy > previous + cfg.energy_tolerance(previous) {
            if cfg.strict_energy {
                return Err(Error::EnergyIncrease {
                    iteration: n + 1,
                    before: previous,
                    after: energy,
                });
            }
            energy_violations += 1;
        }
        trace.push(EnergyRecord {
            iter: n + 1,
            energy,
            wall_ms: clock(),
        });

        let next_mask = binarize(&next);
        iterations = n + 1;
        let stationary = next_mask == mask;
        u = next;
        mask = next_mask;
        if stationary {
            converged = true;
            break;
        }
    }

    Ok(RunResult {
        u,
        mask,
        iterations,
        converged,
        trace,
        iglim: None,
        stabilizers,
        energy_violations,
        guarded_pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dims;
    use crate::spectral::MatrixDct;

    #[test]
    fn binarize_uniform_and_single() {
        let d = Dims::new(4, 3);
        assert_eq!(binarize(&Field::constant(d, -1.0)).count(), 0);
        assert_eq!(binarize(&Field::constant(d, 1.0)).count(), 12);
        let mut u = Field::constant(d, -1.0);
        u.set(2, 1, 0.3);
        let m = binarize(&u);
        assert_eq!(m.count(), 1);
        assert!(m.get(2, 1));
        // zero is background
        assert_eq!(binarize(&Field::zeros(d)).count(), 0);
    }

    #[test]
    fn dice_cases() {
        let d = Dims::new(4, 4);
        let a = LabelMask::from_fn(d, |i, j| i < 2 && j < 2);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        let b = LabelMask::from_fn(d, |i, j| i >= 2 && j >= 2);
        assert_eq!(dice(&a, &b).unwrap(), 0.0);
        let shifted = LabelMask::from_fn(d, |i, j| i < 2 && (1..3).contains(&j));
        assert_eq!(dice(&a, &shifted).unwrap(), 0.5);
        let empty = LabelMask::filled(d, false);
        assert_eq!(dice(&empty, &empty).unwrap(), 1.0);
        assert!(dice(&a, &LabelMask::filled(Dims::new(3, 3), false)).is_err());
    }

    #[test]
    fn constant_image_reports_no_edges() {
        let d = Dims::new(10, 10);
        let img = GrayImage::new(Field::constant(d, 0.5)).unwrap();
        let err = segment(&img, &RunConfig::default(), &MatrixDct::new(d), || 0.0).unwrap_err();
        assert_eq!(err, Error::NoEdgesDetected);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.max_iters = 0;
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            stabilizer: StabilizerPolicy::Fixed { value: -1.0 },
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
