//! Pixel grids and the column-major flattening shared by every module.
//!
//! A grid has `rows` (M₁) and `cols` (M₂). Pixel `(i, j)` with 0-based row `i`
//! and column `j` lives at flat index `i + rows * j`, which is the 1-based
//! relation `k = i + M₁(j − 1)` shifted to 0-based indices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Smallest extent an image may have along either axis.
pub const MIN_IMAGE_EXTENT: usize = 3;

/// 8-neighbour offsets `(di, dj)` in the order I¹..I⁸ used by the graph
/// Laplacian: up-left, up, up-right, right, down-right, down, down-left, left.
pub const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
];

/// 4-neighbour offsets.
pub const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
}

impl Dims {
    pub const fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub const fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, i: usize, j: usize) -> usize {
        i + self.rows * j
    }

    #[inline]
    pub const fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.rows, k / self.rows)
    }

    /// Returns the flat index of `(i + di, j + dj)` if it lies on the grid.
    #[inline]
    pub fn offset(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<usize> {
        let ni = i.checked_add_signed(di)?;
        let nj = j.checked_add_signed(dj)?;
        (ni < self.rows && nj < self.cols).then(|| self.index(ni, nj))
    }

    pub(crate) fn check_same(&self, other: Dims, what: &str) -> Result<()> {
        if *self == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(alloc::format!(
                "{what}: {}x{} vs {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )))
        }
    }
}

/// A real-valued field on a grid, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    dims: Dims,
    data: Vec<f64>,
}

/// The phase field `u`; its sign splits object (`u > 0`) from background.
pub type PhaseField = Field;

impl Field {
    pub fn zeros(dims: Dims) -> Self {
        Self::constant(dims, 0.0)
    }

    pub fn constant(dims: Dims, value: f64) -> Self {
        Self {
            dims,
            data: vec![value; dims.len()],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                got: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    /// Builds a field by evaluating `f(i, j)` at every pixel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for j in 0..dims.cols {
            for i in 0..dims.rows {
                data.push(f(i, j));
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.dims.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.dims.index(i, j);
        self.data[k] = value;
    }

    /// Applies `f` pixelwise and returns the new field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixelwise combination of two fields of equal size.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.dims, other.dims);
        Field {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Grayscale input image with intensities normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage(Field);

impl GrayImage {
    /// Wraps a field, checking the extent and the unit intensity range.
    pub fn new(field: Field) -> Result<Self> {
        let dims = field.dims();
        if dims.rows < MIN_IMAGE_EXTENT || dims.cols < MIN_IMAGE_EXTENT {
            return Err(Error::DegenerateDims {
                rows: dims.rows,
                cols: dims.cols,
                min: MIN_IMAGE_EXTENT,
            });
        }
        if let Some((index, &value)) = field
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::IntensityOutOfRange { index, value });
        }
        Ok(Self(field))
    }

    /// Normalizes 8-bit samples given in column-major order.
    pub fn from_u8(dims: Dims, samples: &[u8]) -> Result<Self> {
        if samples.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                got: samples.len(),
            });
        }
        let data = samples.iter().map(|&s| f64::from(s) / 255.0).collect();
        Self::new(Field::from_vec(dims, data)?)
    }

    pub fn dims(&self) -> Dims {
        self.0.dims()
    }

    pub fn field(&self) -> &Field {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn mean(&self) -> f64 {
        let s = self.0.as_slice();
        s.iter().sum::<f64>() / s.len() as f64
    }
}

/// Binary label per pixel; `true` marks the object phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMask {
    dims: Dims,
    labels: Vec<bool>,
}

impl LabelMask {
    pub fn new(dims: Dims, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                got: labels.len(),
            });
        }
        Ok(Self { dims, labels })
    }

    pub fn filled(dims: Dims, value: bool) -> Self {
        Self {
            dims,
            labels: vec![value; dims.len()],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut labels = Vec::with_capacity(dims.len());
        for j in 0..dims.cols {
            for i in 0..dims.rows {
                labels.push(f(i, j));
            }
        }
        Self { dims, labels }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.labels[self.dims.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let k = self.dims.index(i, j);
        self.labels[k] = value;
    }

    pub fn count(&self) -> usize {
        self.labels.iter().filter(|&&b| b).count()
    }

    /// Pixels with at least one 4-neighbour of the opposite label.
    pub fn contour(&self) -> LabelMask {
        let d = self.dims;
        LabelMask::from_fn(d, |i, j| {
            let here = self.get(i, j);
            NEIGHBORS_4
                .iter()
                .filter_map(|&(di, dj)| d.offset(i, j, di, dj))
                .any(|k| self.labels[k] != here)
        })
    }
}

/// A set of pixels stored as a membership bitmap over the grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PixelSet {
    dims: Dims,
    members: Vec<bool>,
}

impl PixelSet {
    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            members: vec![false; dims.len()],
        }
    }

    pub fn full(dims: Dims) -> Self {
        Self {
            dims,
            members: vec![true; dims.len()],
        }
    }

    pub fn from_points(dims: Dims, points: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut set = Self::empty(dims);
        for (i, j) in points {
            set.insert(i, j);
        }
        set
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.members[self.dims.index(i, j)]
    }

    #[inline]
    pub fn contains_index(&self, k: usize) -> bool {
        self.members[k]
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        let k = self.dims.index(i, j);
        self.members[k] = true;
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        let k = self.dims.index(i, j);
        self.members[k] = false;
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    /// Member coordinates in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| self.dims.coords(k))
    }

    pub fn is_subset(&self, other: &PixelSet) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &PixelSet) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !(a && b))
    }

    pub fn to_mask(&self) -> LabelMask {
        LabelMask {
            dims: self.dims,
            labels: self.members.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_matches_column_major_convention() {
        let d = Dims::new(4, 3);
        // 1-based (i, j) = (2, 3) -> k = 2 + 4 * 2 = 10 -> 0-based 9
        assert_eq!(d.index(1, 2), 9);
        for k in 0..d.len() {
            let (i, j) = d.coords(k);
            assert_eq!(d.index(i, j), k);
        }
    }

    #[test]
    fn offset_rejects_out_of_grid() {
        let d = Dims::new(3, 3);
        assert_eq!(d.offset(0, 0, -1, 0), None);
        assert_eq!(d.offset(2, 2, 0, 1), None);
        assert_eq!(d.offset(1, 1, 1, 1), Some(d.index(2, 2)));
    }

    #[test]
    fn gray_image_validates() {
        assert!(matches!(
            GrayImage::new(Field::zeros(Dims::new(2, 5))),
            Err(Error::DegenerateDims { .. })
        ));
        assert!(matches!(
            GrayImage::new(Field::constant(Dims::new(3, 3), 1.5)),
            Err(Error::IntensityOutOfRange { .. })
        ));
        let img = GrayImage::from_u8(Dims::new(3, 3), &[255; 9]).unwrap();
        assert!(img.field().as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn contour_of_uniform_mask_is_empty() {
        let m = LabelMask::filled(Dims::new(5, 5), true);
        assert_eq!(m.contour().count(), 0);
    }

    #[test]
    fn contour_of_single_pixel_includes_its_neighbors() {
        let d = Dims::new(5, 5);
        let mut m = LabelMask::filled(d, false);
        m.set(2, 2, true);
        let c = m.contour();
        let expected = [(2, 2), (1, 2), (3, 2), (2, 1), (2, 3)];
        assert_eq!(c.count(), expected.len());
        for (i, j) in expected {
            assert!(c.get(i, j));
        }
    }

    #[test]
    fn contour_of_half_plane_is_two_columns() {
        let d = Dims::new(6, 8);
        let m = LabelMask::from_fn(d, |_, j| j < 3);
        let c = m.contour();
        for i in 0..6 {
            for j in 0..8 {
                assert_eq!(c.get(i, j), j == 2 || j == 3, "({i},{j})");
            }
        }
    }
}
