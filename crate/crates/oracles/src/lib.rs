//! Slow reference implementations for the segmentation test suites.
//!
//! Nothing here shares numerical code with `aclbf-core`: fields are plain
//! column-major slices (`k = i + rows * j`), kernels are evaluated from the
//! closed form at every tap, and matrix functions go through a dense
//! symmetric eigendecomposition.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest grid (in pixels) the dense oracles accept.
pub const DENSE_CAP: usize = 4096;

/// Largest grid (in pixels) the double-sum oracles accept.
pub const DIRECT_CAP: usize = 32 * 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SizeCapExceeded {
    pub pixels: usize,
    pub cap: usize,
}

impl fmt::Display for SizeCapExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} pixels exceeds oracle cap {}", self.pixels, self.cap)
    }
}

impl std::error::Error for SizeCapExceeded {}

fn check_cap(pixels: usize, cap: usize) -> Result<(), SizeCapExceeded> {
    if pixels > cap {
        Err(SizeCapExceeded { pixels, cap })
    } else {
        Ok(())
    }
}

#[inline]
fn idx(rows: usize, i: usize, j: usize) -> usize {
    i + rows * j
}

/// `exp(−(di² + dj²)/(2σ²)) / (2πσ²)`.
pub fn gaussian(sigma: f64, di: i64, dj: i64) -> f64 {
    let r2 = (di * di + dj * dj) as f64;
    (-r2 / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma)
}

/// Sum of all taps of the truncated square window.
pub fn window_sum(sigma: f64, radius: usize) -> f64 {
    let r = radius as i64;
    let mut s = 0.0;
    for di in -r..=r {
        for dj in -r..=r {
            s += gaussian(sigma, di, dj);
        }
    }
    s
}

/// Zero-padded 2-D convolution with the truncated Gaussian, as a double loop.
pub fn direct_convolve(
    field: &[f64],
    rows: usize,
    cols: usize,
    sigma: f64,
    radius: usize,
) -> Result<Vec<f64>, SizeCapExceeded> {
    check_cap(rows * cols, DIRECT_CAP.max(64 * 64))?;
    let r = radius as i64;
    let mut out = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            let mut acc = 0.0;
            for y in 0..rows {
                for x in 0..cols {
                    let (di, dj) = (i as i64 - y as i64, j as i64 - x as i64);
                    if di.abs() <= r && dj.abs() <= r {
                        acc += gaussian(sigma, di, dj) * field[idx(rows, y, x)];
                    }
                }
            }
            out[idx(rows, i, j)] = acc;
        }
    }
    Ok(out)
}

/// `e(x) = Σ_y K(y − x) (I(x) − f(y))²` over in-domain `y` inside the window.
pub fn definition_ek(
    image: &[f64],
    fit: &[f64],
    rows: usize,
    cols: usize,
    sigma: f64,
    radius: usize,
) -> Result<Vec<f64>, SizeCapExceeded> {
    check_cap(rows * cols, DIRECT_CAP)?;
    let r = radius as i64;
    let mut out = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            let ix = image[idx(rows, i, j)];
            let mut acc = 0.0;
            for y in 0..rows {
                for x in 0..cols {
                    let (di, dj) = (y as i64 - i as i64, x as i64 - j as i64);
                    if di.abs() <= r && dj.abs() <= r {
                        let d = ix - fit[idx(rows, y, x)];
                        acc += gaussian(sigma, di, dj) * d * d;
                    }
                }
            }
            out[idx(rows, i, j)] = acc;
        }
    }
    Ok(out)
}

/// The graph Laplacian at one pixel straight from its definition:
/// `Σ cₖIᵏ − I` with `cₖ = exp(λ(I − Iᵏ)²) / Σ exp(λ(I − Iᵏ)²)`.
pub fn graph_laplacian_at(center: f64, neighbors: &[f64], lambda: f64) -> f64 {
    let w: Vec<f64> = neighbors
        .iter()
        .map(|&v| (lambda * (center - v).powi(2)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.iter()
        .zip(neighbors)
        .map(|(c, v)| c / total * v)
        .sum::<f64>()
        - center
}

/// `Λ_m`: tridiagonal `[1, −2, 1]` with `−1` in both corners.
pub fn neumann_stencil(m: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    for k in 0..m {
        if k > 0 {
            a[(k, k - 1)] = 1.0;
            a[(k, k)] -= 1.0;
        }
        if k + 1 < m {
            a[(k, k + 1)] = 1.0;
            a[(k, k)] -= 1.0;
        }
    }
    a
}

/// `D_h = (I_{M₂} ⊗ Λ_{M₁} + Λ_{M₂} ⊗ I_{M₁}) / h²`.
pub fn assemble_dense_laplacian(
    rows: usize,
    cols: usize,
    h: f64,
) -> Result<DMatrix<f64>, SizeCapExceeded> {
    check_cap(rows * cols, DENSE_CAP)?;
    let a = DMatrix::<f64>::identity(cols, cols).kronecker(&neumann_stencil(rows));
    let b = neumann_stencil(cols).kronecker(&DMatrix::<f64>::identity(rows, rows));
    Ok((a + b) / (h * h))
}

/// `D_h u` through the assembled matrix.
pub fn apply_dense_laplacian(
    u: &[f64],
    rows: usize,
    cols: usize,
    h: f64,
) -> Result<Vec<f64>, SizeCapExceeded> {
    let d = assemble_dense_laplacian(rows, cols, h)?;
    Ok((d * DVector::from_column_slice(u))
        .iter()
        .copied()
        .collect())
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Matrix functions of the symmetric positive definite `L_h = S·I − εD_h`.
pub struct DenseOperator {
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
    dt: f64,
}

impl DenseOperator {
    pub fn new(
        rows: usize,
        cols: usize,
        h: f64,
        eps: f64,
        stabilizer: f64,
        dt: f64,
    ) -> Result<Self, SizeCapExceeded> {
        let d = assemble_dense_laplacian(rows, cols, h)?;
        let n = rows * cols;
        let lh = DMatrix::<f64>::identity(n, n) * stabilizer - d * eps;
        Ok(Self {
            eigen: SymmetricEigen::new(lh),
            dt,
        })
    }

    fn apply(&self, f: impl Fn(f64) -> f64, v: &[f64]) -> Vec<f64> {
        let q = &self.eigen.eigenvectors;
        let coeffs = q.transpose() * DVector::from_column_slice(v);
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(self.eigen.eigenvalues.iter())
                .map(|(c, &l)| c * f(l * self.dt)),
        );
        (q * scaled).iter().copied().collect()
    }

    /// `e^{−L_hΔt} v`
    pub fn exp(&self, v: &[f64]) -> Vec<f64> {
        self.apply(|z| (-z).exp(), v)
    }

    /// `Δt φ₀(L_hΔt) v`
    pub fn phi0(&self, v: &[f64]) -> Vec<f64> {
        let dt = self.dt;
        self.apply(move |z| dt * phi0_reference(z), v)
    }

    /// `Δt φ₁(L_hΔt) v`
    pub fn phi1(&self, v: &[f64]) -> Vec<f64> {
        let dt = self.dt;
        self.apply(move |z| dt * phi1_reference(z), v)
    }

    /// Dense ETD1 step.
    pub fn etd1(&self, u: &[f64], n: &[f64]) -> Vec<f64> {
        add(&self.exp(u), &self.phi0(n))
    }

    /// Dense ETDRK2 step with nonlinearity `nl`.
    pub fn etdrk2(&self, u: &[f64], nl: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let n0 = nl(u);
        let pred = self.etd1(u, &n0);
        let n1 = nl(&pred);
        let diff: Vec<f64> = n1.iter().zip(&n0).map(|(a, b)| a - b).collect();
        add(&add(&self.exp(u), &self.phi0(&n0)), &self.phi1(&diff))
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `φ₀(z) = (1 − e^{−z})/z`; for small `z` the power series to 25 terms.
pub fn phi0_reference(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // Σ (−z)^k / (k+1)!
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..25 {
            sum += term;
            term *= -z / (k as f64 + 2.0);
        }
        sum
    } else {
        (1.0 - (-z).exp()) / z
    }
}

/// `φ₁(z) = (z − 1 + e^{−z})/z²`; for small `z` the power series to 25 terms.
pub fn phi1_reference(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // Σ (−z)^k / (k+2)!
        let mut term = 0.5;
        let mut sum = 0.0;
        for k in 0..25 {
            sum += term;
            term *= -z / (k as f64 + 3.0);
        }
        sum
    } else {
        (z - 1.0 + (-z).exp()) / (z * z)
    }
}

/// Orthonormal 2-D DCT-II as a direct quadruple sum.
pub fn naive_dct2(field: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let alpha = |k: usize, n: usize| {
        if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        }
    };
    let mut out = vec![0.0; rows * cols];
    for l in 0..cols {
        for k in 0..rows {
            let mut acc = 0.0;
            for j in 0..cols {
                for i in 0..rows {
                    acc += field[idx(rows, i, j)]
                        * (PI * k as f64 * (2 * i + 1) as f64 / (2 * rows) as f64).cos()
                        * (PI * l as f64 * (2 * j + 1) as f64 / (2 * cols) as f64).cos();
                }
            }
            out[idx(rows, k, l)] = alpha(k, rows) * alpha(l, cols) * acc;
        }
    }
    out
}

/// Scalar energy ingredients evaluated from their definitions.
pub mod scalar {
    use std::f64::consts::PI;

    pub fn heaviside(x: f64, eps1: f64) -> f64 {
        0.5 * (1.0 + (2.0 / PI) * (x / eps1).atan())
    }

    pub fn delta(x: f64, eps1: f64) -> f64 {
        eps1 / (PI * (eps1 * eps1 + x * x))
    }

    pub fn double_well(u: f64) -> f64 {
        (PI / 2.0 * (u + 1.0)).sin().powi(2)
    }

    /// `W′` by a centred difference of `W` with step `1e-6`.
    pub fn double_well_prime_fd(u: f64) -> f64 {
        let s = 1e-6;
        (double_well(u + s) - double_well(u - s)) / (2.0 * s)
    }

    /// `μ δ′_{ε₁}(U)` from the printed rational form.
    pub fn fitting_slope(u: f64, mu: f64, eps1: f64) -> f64 {
        -(2.0 * mu * eps1 / PI) * u / (eps1 * eps1 + u * u).powi(2)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyParams {
    pub eps: f64,
    pub eps1: f64,
    pub mu: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub h: f64,
}

/// `E_h` with the gradient term taken as `−(ε/2) UᵀD_hU` on an assembled `D_h`.
pub fn dense_energy(
    u: &[f64],
    e1: &[f64],
    e2: &[f64],
    rows: usize,
    cols: usize,
    p: EnergyParams,
) -> Result<f64, SizeCapExceeded> {
    let d = assemble_dense_laplacian(rows, cols, p.h)?;
    let uv = DVector::from_column_slice(u);
    let quad = uv.dot(&(&d * &uv));
    let mut sum = 0.0;
    for k in 0..u.len() {
        let h = scalar::heaviside(u[k], p.eps1);
        sum += scalar::double_well(u[k]) / p.eps
            + p.mu * (p.lambda1 * h * e1[k] + p.lambda2 * (1.0 - h) * e2[k]);
    }
    Ok(sum - 0.5 * p.eps * quad)
}

/// `max_x max_U |μ δ′_{ε₁}(U) (λ₁e₁(x) − λ₂e₂(x))|` by brute force over a
/// dense grid of `U` values in `[−20ε₁, 20ε₁]`.
pub fn max_fitting_derivative(
    e1: &[f64],
    e2: &[f64],
    mu: f64,
    eps1: f64,
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    let samples = 400_001;
    let span = 20.0 * eps1;
    let mut best_slope: f64 = 0.0;
    for s in 0..samples {
        let u = -span + 2.0 * span * s as f64 / (samples - 1) as f64;
        best_slope = best_slope.max(scalar::fitting_slope(u, mu, eps1).abs());
    }
    let mut best: f64 = 0.0;
    for (a, b) in e1.iter().zip(e2) {
        best = best.max(best_slope * (lambda1 * a - lambda2 * b).abs());
    }
    best
}
