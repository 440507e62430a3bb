//! Initial contour from the inhomogeneous graph Laplacian.
//!
//! Pipeline: graph Laplacian → signed zero-cross classification →
//! diagonal-connectivity denoising (repeated `M` times) → region extension →
//! ±1 initial phase field.

use crate::error::{invalid, Error, Result};
use crate::grid::{Dims, Field, GrayImage, PixelSet, NEIGHBORS_8};

/// Which edge set is taken as the inner boundary of the object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Polarity {
    /// `S_p`: inner boundary of an object darker than its background.
    Positive,
    /// `S_n`: inner boundary of an object brighter than its background.
    Negative,
}

impl Polarity {
    pub fn opposite(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SidePolicy {
    Positive,
    Negative,
    /// Pick the side whose pixels' mean intensity is farther from the image mean.
    Auto,
}

/// Edge points of one polarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePointSet {
    pub polarity: Polarity,
    pub points: PixelSet,
}

impl EdgePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IglimParams {
    /// Weight exponent λ of the graph Laplacian.
    pub lambda: f64,
    /// Negative threshold: `L ≤ −k₁` is negative.
    pub k1: f64,
    /// Positive threshold: `L ≥ k₂` is positive.
    pub k2: f64,
    /// Number of denoising passes `M`.
    pub denoise_passes: usize,
    pub side: SidePolicy,
}

impl Default for IglimParams {
    fn default() -> Self {
        Self {
            lambda: 50.0,
            k1: 0.01,
            k2: 0.01,
            denoise_passes: 1,
            side: SidePolicy::Auto,
        }
    }
}

impl IglimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", "must be finite and non-negative"));
        }
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return Err(invalid("k1", "must be finite and non-negative"));
        }
        if !(self.k2 >= 0.0 && self.k2.is_finite()) {
            return Err(invalid("k2", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// `L(x₀) = Σₖ cₖ Iᵏ − I` with `cₖ ∝ exp(λ(I − Iᵏ)²)` normalized over the
/// neighbours that exist. Border pixels therefore average over 3 or 5
/// neighbours instead of 8.
///
/// Evaluated as `Σₖ cₖ (Iᵏ − I)`, which is exactly zero on flat patches.
pub fn graph_laplacian(image: &GrayImage, lambda: f64) -> Result<Field> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "must be finite and non-negative"));
    }
    let dims = image.dims();
    let src = image.field().as_slice();
    Ok(Field::from_fn(dims, |i, j| {
        let center = src[dims.index(i, j)];
        let mut diffs = [0.0; 8];
        let mut expo = [0.0; 8];
        let mut n = 0;
        for &(di, dj) in &NEIGHBORS_8 {
            if let Some(k) = dims.offset(i, j, di, dj) {
                let d = src[k] - center;
                diffs[n] = d;
                expo[n] = lambda * d * d;
                n += 1;
            }
        }
        // shift by the largest exponent so large λ cannot overflow
        let top = expo[..n].iter().fold(f64::NEG_INFINITY, |m, &e| m.max(e));
        let mut w = [0.0; 8];
        let mut total = 0.0;
        for k in 0..n {
            w[k] = libm::exp(expo[k] - top);
            total += w[k];
        }
        let mut acc = 0.0;
        for k in 0..n {
            acc += (w[k] / total) * diffs[k];
        }
        acc
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Positive,
    Negative,
    Unsigned,
}

fn sign_of(v: f64, k1: f64, k2: f64) -> Sign {
    if v >= k2 {
        Sign::Positive
    } else if v <= -k1 {
        Sign::Negative
    } else {
        Sign::Unsigned
    }
}

/// Splits the zero-cross points of `laplacian` into `(S_p, S_n)`.
///
/// A signed pixel is a zero-cross point when one of its 8 neighbours carries
/// the opposite sign. Pixels inside the dead zone `(−k₁, k₂)` are unsigned and
/// never take part in a crossing.
pub fn classify_zero_cross(
    laplacian: &Field,
    k1: f64,
    k2: f64,
) -> Result<(EdgePointSet, EdgePointSet)> {
    if !(k1 >= 0.0 && k2 >= 0.0) {
        return Err(invalid("k1/k2", "thresholds must be non-negative"));
    }
    let dims = laplacian.dims();
    let l = laplacian.as_slice();
    let mut sp = PixelSet::empty(dims);
    let mut sn = PixelSet::empty(dims);
    for j in 0..dims.cols {
        for i in 0..dims.rows {
            let s = sign_of(l[dims.index(i, j)], k1, k2);
            let want = match s {
                Sign::Positive => Sign::Negative,
                Sign::Negative => Sign::Positive,
                Sign::Unsigned => continue,
            };
            let crossing = NEIGHBORS_8
                .iter()
                .filter_map(|&(di, dj)| dims.offset(i, j, di, dj))
                .any(|k| sign_of(l[k], k1, k2) == want);
            if crossing {
                match s {
                    Sign::Positive => sp.insert(i, j),
                    _ => sn.insert(i, j),
                }
            }
        }
    }
    Ok((
        EdgePointSet {
            polarity: Polarity::Positive,
            points: sp,
        },
        EdgePointSet {
            polarity: Polarity::Negative,
            points: sn,
        },
    ))
}

/// Corner triples `S₁..S₄` around a pixel, as `(di, dj)` offsets.
const CORNERS: [[(isize, isize); 3]; 4] = [
    [(-1, -1), (0, -1), (-1, 0)],
    [(-1, 1), (0, 1), (-1, 0)],
    [(1, -1), (0, -1), (1, 0)],
    [(1, 1), (0, 1), (1, 0)],
];

/// One denoising pass: keeps the diagonally connected points, i.e. those with
/// members in both `S₁` and `S₄`, or in both `S₂` and `S₃`. Every decision
/// reads the input set, so removals do not cascade within a pass.
pub fn denoise_pass(set: &EdgePointSet) -> EdgePointSet {
    let pts = &set.points;
    let dims = pts.dims();
    let mut out = PixelSet::empty(dims);
    for (i, j) in pts.iter() {
        let hit = |c: usize| {
            CORNERS[c]
                .iter()
                .filter_map(|&(di, dj)| dims.offset(i, j, di, dj))
                .any(|k| pts.contains_index(k))
        };
        if (hit(0) && hit(3)) || (hit(1) && hit(2)) {
            out.insert(i, j);
        }
    }
    EdgePointSet {
        polarity: set.polarity,
        points: out,
    }
}

/// Applies [`denoise_pass`] `passes` times.
pub fn denoise(set: &EdgePointSet, passes: usize) -> EdgePointSet {
    let mut cur = set.clone();
    for _ in 0..passes {
        cur = denoise_pass(&cur);
    }
    cur
}

/// `S_sel ∪ R_sel`, where `R_sel` holds the 8-neighbours of `S_sel` that are
/// not in the opposite set.
pub fn extend_and_select(selected: &EdgePointSet, opposite: &EdgePointSet) -> Result<PixelSet> {
    if selected.is_empty() {
        return Err(Error::NoEdgesDetected);
    }
    let dims = selected.points.dims();
    let mut region = selected.points.clone();
    for (i, j) in selected.points.iter() {
        for &(di, dj) in &NEIGHBORS_8 {
            if let Some(k) = dims.offset(i, j, di, dj) {
                if !opposite.points.contains_index(k) {
                    let (ni, nj) = dims.coords(k);
                    region.insert(ni, nj);
                }
            }
        }
    }
    Ok(region)
}

/// `u₀ = +1` on the region and `−1` elsewhere.
pub fn initial_field(region: &PixelSet) -> Field {
    let dims = region.dims();
    Field::from_fn(dims, |i, j| if region.contains(i, j) { 1.0 } else { -1.0 })
}

/// Mean image intensity over a pixel set, `None` when the set is empty.
fn mean_over(image: &GrayImage, set: &PixelSet) -> Option<f64> {
    let (sum, n) = set
        .iter()
        .fold((0.0, 0usize), |(s, n), (i, j)| (s + image.get(i, j), n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Resolves the side policy against the (denoised) edge sets.
pub fn choose_side(
    image: &GrayImage,
    sp: &EdgePointSet,
    sn: &EdgePointSet,
    policy: SidePolicy,
) -> Polarity {
    match policy {
        SidePolicy::Positive => Polarity::Positive,
        SidePolicy::Negative => Polarity::Negative,
        SidePolicy::Auto => {
            let global = image.mean();
            let dist = |s: &EdgePointSet| mean_over(image, &s.points).map(|m| (m - global).abs());
            match (dist(sp), dist(sn)) {
                (Some(p), Some(n)) if n > p => Polarity::Negative,
                (None, Some(_)) => Polarity::Negative,
                _ => Polarity::Positive,
            }
        }
    }
}

/// Everything the initialization produced, kept for diagnostics and output.
#[derive(Debug, Clone)]
pub struct IglimOutput {
    pub laplacian: Field,
    /// Zero-cross sets before denoising.
    pub raw_positive: EdgePointSet,
    pub raw_negative: EdgePointSet,
    /// Zero-cross sets after `M` denoising passes.
    pub positive: EdgePointSet,
    pub negative: EdgePointSet,
    pub side: Polarity,
    pub region: PixelSet,
    pub u0: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IglimDiagnostics {
    pub positive_points: usize,
    pub negative_points: usize,
    pub side: Polarity,
    pub region_size: usize,
}

impl IglimOutput {
    pub fn diagnostics(&self) -> IglimDiagnostics {
        IglimDiagnostics {
            positive_points: self.positive.len(),
            negative_points: self.negative.len(),
            side: self.side,
            region_size: self.region.len(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.u0.dims()
    }
}

/// Runs the full initialization.
///
/// Both polarities are denoised with the same rule. The region extension
/// excludes the raw (undenoised) opposite set, so a neighbour with a signed
/// opposite Laplacian value is never pulled into the region.
pub fn run(image: &GrayImage, params: &IglimParams) -> Result<IglimOutput> {
    params.validate()?;
    let laplacian = graph_laplacian(image, params.lambda)?;
    let (raw_p, raw_n) = classify_zero_cross(&laplacian, params.k1, params.k2)?;
    let positive = denoise(&raw_p, params.denoise_passes);
    let negative = denoise(&raw_n, params.denoise_passes);
    let side = choose_side(image, &positive, &negative, params.side);
    let (sel, opp) = match side {
        Polarity::Positive => (&positive, &raw_n),
        Polarity::Negative => (&negative, &raw_p),
    };
    let region = extend_and_select(sel, opp)?;
    let u0 = initial_field(&region);
    Ok(IglimOutput {
        laplacian,
        raw_positive: raw_p,
        raw_negative: raw_n,
        positive,
        negative,
        side,
        region,
        u0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(dims: Dims, f: impl FnMut(usize, usize) -> f64) -> GrayImage {
        GrayImage::new(Field::from_fn(dims, f)).unwrap()
    }

    fn edge_set(polarity: Polarity, dims: Dims, pts: &[(usize, usize)]) -> EdgePointSet {
        EdgePointSet {
            polarity,
            points: PixelSet::from_points(dims, pts.iter().copied()),
        }
    }

    #[test]
    fn constant_image_has_zero_laplacian() {
        let im = img(Dims::new(6, 7), |_, _| 0.42);
        for lambda in [0.0, 1.0, 50.0, 1e4] {
            let l = graph_laplacian(&im, lambda).unwrap();
            assert!(l.as_slice().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn negative_lambda_rejected() {
        let im = img(Dims::new(3, 3), |_, _| 0.0);
        assert!(graph_laplacian(&im, -1.0).is_err());
    }

    #[test]
    fn lambda_zero_bright_center_gives_minus_one() {
        let im = img(
            Dims::new(3, 3),
            |i, j| if (i, j) == (1, 1) { 1.0 } else { 0.0 },
        );
        let l = graph_laplacian(&im, 0.0).unwrap();
        assert_eq!(l.get(1, 1), -1.0);
    }

    #[test]
    fn lambda_fifty_patch_matches_scalar_evaluation() {
        // centre 0.5, axial 0.6, diagonal 0.4
        let im = img(Dims::new(3, 3), |i, j| match (i, j) {
            (1, 1) => 0.5,
            (1, _) | (_, 1) => 0.6,
            _ => 0.4,
        });
        let l = graph_laplacian(&im, 50.0).unwrap();
        // every |I − Iᵏ| = 0.1 so all weights equal 1/8:
        // L = (4·0.6 + 4·0.4)/8 − 0.5 = 0
        let expected = (4.0 * 0.6 + 4.0 * 0.4) / 8.0 - 0.5;
        assert!((l.get(1, 1) - expected).abs() < 1e-15);
    }

    #[test]
    fn large_lambda_does_not_overflow() {
        let im = img(Dims::new(4, 4), |i, j| ((i + 2 * j) % 3) as f64 / 2.0);
        let l = graph_laplacian(&im, 1e6).unwrap();
        assert!(l.is_finite());
    }

    #[test]
    fn zero_field_has_no_edges() {
        let l = Field::zeros(Dims::new(5, 5));
        let (p, n) = classify_zero_cross(&l, 0.01, 0.01).unwrap();
        assert!(p.is_empty() && n.is_empty());
    }

    #[test]
    fn vertical_step_classification() {
        let d = Dims::new(6, 8);
        let c = 3; // columns 0..=3 positive
        let l = Field::from_fn(d, |_, j| if j <= c { 0.5 } else { -0.5 });
        let (p, n) = classify_zero_cross(&l, 0.01, 0.01).unwrap();
        for i in 0..6 {
            for j in 0..8 {
                assert_eq!(p.points.contains(i, j), j == c);
                assert_eq!(n.points.contains(i, j), j == c + 1);
            }
        }
    }

    #[test]
    fn single_positive_pixel_classification() {
        let d = Dims::new(7, 7);
        let l = Field::from_fn(d, |i, j| if (i, j) == (3, 3) { 0.5 } else { -0.5 });
        let (p, n) = classify_zero_cross(&l, 0.01, 0.01).unwrap();
        assert_eq!(p.points.iter().collect::<alloc::vec::Vec<_>>(), [(3, 3)]);
        assert_eq!(n.len(), 8);
        for &(di, dj) in &NEIGHBORS_8 {
            let k = d.offset(3, 3, di, dj).unwrap();
            assert!(n.points.contains_index(k));
        }
    }

    #[test]
    fn dead_zone_blocks_crossings() {
        let d = Dims::new(3, 5);
        // +, dead, − columns: no pixel touches the opposite sign
        let l = Field::from_fn(d, |_, j| match j {
            0 | 1 => 0.5,
            2 => 0.0,
            _ => -0.5,
        });
        let (p, n) = classify_zero_cross(&l, 0.01, 0.01).unwrap();
        assert!(p.is_empty() && n.is_empty());
    }

    #[test]
    fn isolated_point_is_removed() {
        let d = Dims::new(5, 5);
        let s = edge_set(Polarity::Positive, d, &[(2, 2)]);
        assert!(denoise_pass(&s).is_empty());
    }

    #[test]
    fn anti_diagonal_chain_keeps_middle() {
        let d = Dims::new(7, 7);
        let s = edge_set(Polarity::Positive, d, &[(3, 3), (4, 2), (2, 4)]);
        let once = denoise_pass(&s);
        assert!(once.points.contains(3, 3));
        assert!(!once.points.contains(4, 2));
        assert!(!once.points.contains(2, 4));
        assert!(denoise(&s, 2).is_empty());
    }

    #[test]
    fn rectangle_loop_survives_any_number_of_passes() {
        let d = Dims::new(10, 12);
        let mut pts = alloc::vec::Vec::new();
        for i in 2..=6 {
            for j in 3..=9 {
                if i == 2 || i == 6 || j == 3 || j == 9 {
                    pts.push((i, j));
                }
            }
        }
        let s = edge_set(Polarity::Negative, d, &pts);
        for m in 0..6 {
            assert_eq!(denoise(&s, m), s);
        }
    }

    #[test]
    fn extension_of_lonely_point() {
        let d = Dims::new(5, 5);
        let sp = edge_set(Polarity::Positive, d, &[(2, 2)]);
        let sn = edge_set(Polarity::Negative, d, &[]);
        let r = extend_and_select(&sp, &sn).unwrap();
        assert_eq!(r.len(), 9);
    }

    #[test]
    fn extension_fully_blocked() {
        let d = Dims::new(5, 5);
        let sp = edge_set(Polarity::Positive, d, &[(2, 2)]);
        let ring: alloc::vec::Vec<_> = NEIGHBORS_8
            .iter()
            .map(|&(di, dj)| d.coords(d.offset(2, 2, di, dj).unwrap()))
            .collect();
        let sn = edge_set(Polarity::Negative, d, &ring);
        let r = extend_and_select(&sp, &sn).unwrap();
        assert_eq!(r.iter().collect::<alloc::vec::Vec<_>>(), [(2, 2)]);
    }

    #[test]
    fn extension_of_step_edge() {
        let d = Dims::new(6, 8);
        let c = 3;
        let l = Field::from_fn(d, |_, j| if j <= c { 0.5 } else { -0.5 });
        let (p, n) = classify_zero_cross(&l, 0.01, 0.01).unwrap();
        let r = extend_and_select(&p, &n).unwrap();
        for i in 0..6 {
            for j in 0..8 {
                assert_eq!(r.contains(i, j), j == c - 1 || j == c, "({i},{j})");
            }
        }
    }

    #[test]
    fn empty_selection_is_an_error() {
        let d = Dims::new(4, 4);
        let sp = edge_set(Polarity::Positive, d, &[]);
        let sn = edge_set(Polarity::Negative, d, &[(1, 1)]);
        assert_eq!(extend_and_select(&sp, &sn), Err(Error::NoEdgesDetected));
    }

    #[test]
    fn initial_field_extremes() {
        let d = Dims::new(4, 5);
        assert!(initial_field(&PixelSet::empty(d))
            .as_slice()
            .iter()
            .all(|&v| v == -1.0));
        assert!(initial_field(&PixelSet::full(d))
            .as_slice()
            .iter()
            .all(|&v| v == 1.0));
        let region = PixelSet::from_points(d, [(0, 0), (3, 4), (1, 2)]);
        let u = initial_field(&region);
        for i in 0..4 {
            for j in 0..5 {
                let want = if region.contains(i, j) { 1.0 } else { -1.0 };
                assert_eq!(u.get(i, j), want);
            }
        }
    }

    #[test]
    fn constant_image_fails_with_no_edges() {
        let im = img(Dims::new(8, 8), |_, _| 0.5);
        let err = run(&im, &IglimParams::default()).unwrap_err();
        assert_eq!(err, Error::NoEdgesDetected);
    }

    #[test]
    fn auto_side_prefers_dark_minority_object() {
        let d = Dims::new(30, 30);
        let im = img(d, |i, j| {
            let (y, x) = (i as f64 - 14.5, j as f64 - 14.5);
            if x * x + y * y <= 36.0 {
                0.3
            } else {
                0.8
            }
        });
        let out = run(&im, &IglimParams::default()).unwrap();
        assert_eq!(out.side, Polarity::Positive);
        // the inner ring lies on the dark object
        assert!(out.positive.points.iter().all(|(i, j)| im.get(i, j) == 0.3));
        assert!(out.negative.points.iter().all(|(i, j)| im.get(i, j) == 0.8));
    }
}
