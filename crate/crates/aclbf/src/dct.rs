//! FFT-backed cosine transform for the solver's hot loop.

use std::sync::Arc;

use aclbf_core::{CosineTransform, Dims, Field};
use rustdct::{DctPlanner, TransformType2And3};

/// Orthonormal 2-D DCT-II/DCT-III pair planned for one grid size.
///
/// rustdct computes the unnormalized transforms; the scale factors that make
/// the pair orthonormal are applied here so results match
/// [`aclbf_core::MatrixDct`] to round-off.
pub struct FastDct {
    dims: Dims,
    along_rows: Arc<dyn TransformType2And3<f64>>,
    along_cols: Arc<dyn TransformType2And3<f64>>,
}

impl FastDct {
    pub fn new(dims: Dims) -> Self {
        let mut planner = DctPlanner::new();
        Self {
            dims,
            along_rows: planner.plan_dct2(dims.rows),
            along_cols: planner.plan_dct2(dims.cols),
        }
    }

    fn transform(&self, input: &Field, inverse: bool) -> Field {
        let d = self.dims;
        assert_eq!(input.dims(), d, "cosine transform bound to another grid");
        let mut data = input.as_slice().to_vec();
        for column in data.chunks_exact_mut(d.rows) {
            pass(self.along_rows.as_ref(), column, inverse);
        }
        let mut rows = transpose(&data, d.rows, d.cols);
        for row in rows.chunks_exact_mut(d.cols) {
            pass(self.along_cols.as_ref(), row, inverse);
        }
        let back = transpose(&rows, d.cols, d.rows);
        Field::from_vec(d, back).expect("same length")
    }
}

/// One orthonormal 1-D transform in place.
fn pass(plan: &dyn TransformType2And3<f64>, v: &mut [f64], inverse: bool) {
    let n = v.len() as f64;
    let a0 = (1.0 / n).sqrt();
    let ak = (2.0 / n).sqrt();
    if inverse {
        v[0] *= 2.0 * a0;
        for x in v[1..].iter_mut() {
            *x *= ak;
        }
        plan.process_dct3(v);
    } else {
        plan.process_dct2(v);
        v[0] *= a0;
        for x in v[1..].iter_mut() {
            *x *= ak;
        }
    }
}

/// `data` holds `inner`-long contiguous runs, `outer` of them.
fn transpose(data: &[f64], inner: usize, outer: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        for i in 0..inner {
            out[i * outer + o] = data[o * inner + i];
        }
    }
    out
}

impl CosineTransform for FastDct {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn forward(&self, field: &Field) -> Field {
        self.transform(field, false)
    }

    fn inverse(&self, coeffs: &Field) -> Field {
        self.transform(coeffs, true)
    }
}
