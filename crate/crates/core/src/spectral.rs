//! Neumann Laplacian spectrum and the orthonormal 2-D cosine transform that
//! diagonalizes it.
//!
//! The 1-D Neumann stencil `Λ_M` (diagonal `−2`, corners `−1`, off-diagonals
//! `1`) has eigenvectors `cos(πk(2n+1)/(2M))` with eigenvalues
//! `2cos(kπ/M) − 2`. `D_h = (I⊗Λ_{M₁} + Λ_{M₂}⊗I)/h²` is therefore diagonal in
//! the type-II cosine basis along both axes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::grid::{Dims, Field};

/// Eigenvalue of `Λ_m` for mode `k`.
#[inline]
pub fn stencil_eigenvalue(k: usize, m: usize) -> f64 {
    2.0 * libm::cos(k as f64 * PI / m as f64) - 2.0
}

/// Eigenvalue field `d(i, j)` of `D_h`, laid out like any other field.
pub fn laplacian_eigenvalues(dims: Dims, h: f64) -> Result<Field> {
    if dims.rows == 0 || dims.cols == 0 {
        return Err(invalid("dims", "grid must be non-empty"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", "must be positive and finite"));
    }
    let inv_h2 = 1.0 / (h * h);
    let rows: Vec<f64> = (0..dims.rows)
        .map(|k| stencil_eigenvalue(k, dims.rows))
        .collect();
    let cols: Vec<f64> = (0..dims.cols)
        .map(|k| stencil_eigenvalue(k, dims.cols))
        .collect();
    Ok(Field::from_fn(dims, |i, j| (rows[i] + cols[j]) * inv_h2))
}

/// Orthonormal 2-D cosine transform pair: type-II forward, type-III inverse.
///
/// Implementations are bound to one grid size.
pub trait CosineTransform {
    fn dims(&self) -> Dims;
    fn forward(&self, field: &Field) -> Field;
    fn inverse(&self, coeffs: &Field) -> Field;
}

/// Orthonormal DCT-II matrix of size `n`, row `k` holding basis vector `k`.
fn dct_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let a0 = libm::sqrt(1.0 / n as f64);
    let ak = libm::sqrt(2.0 / n as f64);
    for k in 0..n {
        let a = if k == 0 { a0 } else { ak };
        for x in 0..n {
            let arg = PI * k as f64 * (2 * x + 1) as f64 / (2 * n) as f64;
            m[k * n + x] = a * libm::cos(arg);
        }
    }
    m
}

/// Cosine transform through precomputed basis matrices, one per axis.
///
/// Costs `O(M₁M₂(M₁ + M₂))` per transform and needs no allocator beyond the
/// tables, which keeps it usable without `std`.
#[derive(Debug, Clone)]
pub struct MatrixDct {
    dims: Dims,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl MatrixDct {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            rows: dct_matrix(dims.rows),
            cols: dct_matrix(dims.cols),
        }
    }

    /// `transpose == false` applies `C` along each axis, `true` applies `Cᵀ`.
    fn apply(&self, input: &Field, transpose: bool) -> Field {
        let d = self.dims;
        assert_eq!(input.dims(), d, "cosine transform bound to another grid");
        let (m1, m2) = (d.rows, d.cols);
        let src = input.as_slice();

        // along i: every column is a contiguous vector of length m1
        let mut tmp = vec![0.0; d.len()];
        for j in 0..m2 {
            let x = &src[j * m1..(j + 1) * m1];
            let y = &mut tmp[j * m1..(j + 1) * m1];
            for (k, yk) in y.iter_mut().enumerate() {
                let mut acc = 0.0;
                if transpose {
                    for (n, &xn) in x.iter().enumerate() {
                        acc += self.rows[n * m1 + k] * xn;
                    }
                } else {
                    let row = &self.rows[k * m1..(k + 1) * m1];
                    for (c, &xn) in row.iter().zip(x) {
                        acc += c * xn;
                    }
                }
                *yk = acc;
            }
        }

        // along j: output column k is a combination of input columns
        let mut out = vec![0.0; d.len()];
        for k in 0..m2 {
            let dst = &mut out[k * m1..(k + 1) * m1];
            for n in 0..m2 {
                let c = if transpose {
                    self.cols[n * m2 + k]
                } else {
                    self.cols[k * m2 + n]
                };
                let col = &tmp[n * m1..(n + 1) * m1];
                for (o, &v) in dst.iter_mut().zip(col) {
                    *o += c * v;
                }
            }
        }
        Field::from_vec(d, out).expect("length preserved")
    }
}

impl CosineTransform for MatrixDct {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn forward(&self, field: &Field) -> Field {
        self.apply(field, false)
    }

    fn inverse(&self, coeffs: &Field) -> Field {
        self.apply(coeffs, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mode_is_zero() {
        let d = laplacian_eigenvalues(Dims::new(5, 7), 0.3).unwrap();
        assert_eq!(d.get(0, 0), 0.0);
        assert!(d.as_slice().iter().all(|&v| v <= 0.0));
    }

    #[test]
    fn two_point_stencil() {
        assert!((stencil_eigenvalue(1, 2) + 2.0).abs() < 1e-15);
        let h = 0.5;
        let d = laplacian_eigenvalues(Dims::new(2, 1), h).unwrap();
        assert_eq!(d.get(0, 0), 0.0);
        assert!((d.get(1, 0) + 2.0 / (h * h)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_spacing() {
        assert!(laplacian_eigenvalues(Dims::new(3, 3), 0.0).is_err());
    }

    #[test]
    fn constant_field_maps_to_dc() {
        let d = Dims::new(6, 4);
        let t = MatrixDct::new(d);
        let c = t.forward(&Field::constant(d, 2.5));
        let dc = 2.5 * libm::sqrt(24.0);
        assert!((c.get(0, 0) - dc).abs() < 1e-12);
        for k in 1..d.len() {
            assert!(c.as_slice()[k].abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let d = Dims::new(7, 5);
        let t = MatrixDct::new(d);
        let f = Field::from_fn(d, |i, j| {
            libm::sin(i as f64 * 1.3 + j as f64 * 0.7) + 0.1 * j as f64
        });
        let back = t.inverse(&t.forward(&f));
        for (a, b) in f.as_slice().iter().zip(back.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
