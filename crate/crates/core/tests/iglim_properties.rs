mod common;

use aclbf_core::grid::NEIGHBORS_8;
use aclbf_core::iglim::{self, classify_zero_cross, denoise_pass, graph_laplacian, EdgePointSet};
use aclbf_core::{Dims, Error, Field, GrayImage, IglimParams, PixelSet, Polarity};
use aclbf_oracles as oracle;
use common::{random_field, random_image, rng};
use proptest::prelude::*;

/// Average-minus-centre over the eight neighbours, as differences.
fn homogeneous_stencil(img: &GrayImage, i: usize, j: usize) -> f64 {
    let d = img.dims();
    let c = img.get(i, j);
    let mut acc = 0.0;
    for &(di, dj) in &NEIGHBORS_8 {
        let k = d.offset(i, j, di, dj).unwrap();
        acc += 0.125 * (img.field().as_slice()[k] - c);
    }
    acc
}

#[test]
fn lambda_zero_is_homogeneous_stencil_bitwise() {
    let mut r = rng(31);
    for _ in 0..10 {
        let d = Dims::new(17, 13);
        let img = random_image(&mut r, d);
        let l = graph_laplacian(&img, 0.0).unwrap();
        for j in 1..d.cols - 1 {
            for i in 1..d.rows - 1 {
                assert_eq!(
                    l.get(i, j).to_bits(),
                    homogeneous_stencil(&img, i, j).to_bits()
                );
            }
        }
    }
}

#[test]
fn lambda_zero_matches_plain_average_to_roundoff() {
    let mut r = rng(32);
    let d = Dims::new(9, 9);
    let img = random_image(&mut r, d);
    let l = graph_laplacian(&img, 0.0).unwrap();
    for j in 1..8 {
        for i in 1..8 {
            let nb: Vec<f64> = NEIGHBORS_8
                .iter()
                .map(|&(di, dj)| img.field().as_slice()[d.offset(i, j, di, dj).unwrap()])
                .collect();
            let avg = nb.iter().sum::<f64>() / 8.0 - img.get(i, j);
            assert!((l.get(i, j) - avg).abs() < 1e-15);
        }
    }
}

fn neighbors_of(img: &GrayImage, i: usize, j: usize) -> Vec<f64> {
    let d = img.dims();
    NEIGHBORS_8
        .iter()
        .filter_map(|&(di, dj)| d.offset(i, j, di, dj))
        .map(|k| img.field().as_slice()[k])
        .collect()
}

#[test]
fn every_pixel_matches_definition_oracle() {
    let mut r = rng(33);
    let d = Dims::new(7, 6);
    let img = random_image(&mut r, d);
    for lambda in [0.0, 1.0, 50.0, 400.0] {
        let l = graph_laplacian(&img, lambda).unwrap();
        for j in 0..d.cols {
            for i in 0..d.rows {
                let want =
                    oracle::graph_laplacian_at(img.get(i, j), &neighbors_of(&img, i, j), lambda);
                assert!(
                    (l.get(i, j) - want).abs() < 1e-12,
                    "λ={lambda} at ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn weights_favour_dissimilar_neighbours() {
    // c_k ∝ exp(λ(I − Iᵏ)²): the most different neighbour pulls hardest
    let center = 0.5;
    let nb = [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.9];
    let l = oracle::graph_laplacian_at(center, &nb, 50.0);
    let flat = oracle::graph_laplacian_at(center, &nb, 0.0);
    assert!(l > flat && flat > 0.0);
    let d = Dims::new(3, 3);
    let img = GrayImage::new(Field::from_fn(
        d,
        |i, j| if (i, j) == (2, 2) { 0.9 } else { 0.5 },
    ))
    .unwrap();
    let got = graph_laplacian(&img, 50.0).unwrap().get(1, 1);
    assert!((got - l).abs() < 1e-14);
}

#[test]
fn empty_region_never_reaches_solver() {
    let d = Dims::new(6, 6);
    let img = GrayImage::new(Field::constant(d, 0.2)).unwrap();
    assert_eq!(
        iglim::run(&img, &IglimParams::default()).unwrap_err(),
        Error::NoEdgesDetected
    );
}

fn edge_set(points: PixelSet) -> EdgePointSet {
    EdgePointSet {
        polarity: Polarity::Positive,
        points,
    }
}

fn random_set(r: &mut rand_chacha::ChaCha8Rng, d: Dims, density: f64) -> PixelSet {
    use rand::Rng;
    let mut s = PixelSet::empty(d);
    for j in 0..d.cols {
        for i in 0..d.rows {
            if r.random_bool(density) {
                s.insert(i, j);
            }
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_are_normalized_and_monotone(
        center in 0.0f64..1.0,
        nb in prop::collection::vec(0.0f64..1.0, 3..=8),
        lambda in 0.01f64..200.0,
    ) {
        let raw: Vec<f64> = nb.iter().map(|&v| (lambda * (center - v).powi(2)).exp()).collect();
        let total: f64 = raw.iter().sum();
        let c: Vec<f64> = raw.iter().map(|w| w / total).collect();
        prop_assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(c.iter().all(|&w| w > 0.0 && w <= 1.0));
        for a in 0..nb.len() {
            for b in 0..nb.len() {
                if (center - nb[a]).abs() > (center - nb[b]).abs() {
                    prop_assert!(c[a] >= c[b]);
                }
            }
        }
    }

    #[test]
    fn laplacian_bounded_by_neighbour_range(seed in any::<u64>(), lambda in 0.0f64..300.0) {
        // a convex combination of neighbours minus the centre
        let mut r = rng(seed);
        let d = Dims::new(8, 7);
        let img = random_image(&mut r, d);
        let l = graph_laplacian(&img, lambda).unwrap();
        for j in 0..d.cols {
            for i in 0..d.rows {
                let nb = neighbors_of(&img, i, j);
                let lo = nb.iter().cloned().fold(f64::INFINITY, f64::min) - img.get(i, j);
                let hi = nb.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - img.get(i, j);
                prop_assert!(l.get(i, j) >= lo - 1e-12 && l.get(i, j) <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn zero_cross_sets_are_disjoint_and_signed(seed in any::<u64>(), k1 in 0.0f64..0.3, k2 in 0.0f64..0.3) {
        let mut r = rng(seed);
        let d = Dims::new(9, 10);
        let l = random_field(&mut r, d, -0.5, 0.5);
        let (sp, sn) = classify_zero_cross(&l, k1, k2).unwrap();
        prop_assert!(sp.points.is_disjoint(&sn.points));
        for (i, j) in sp.points.iter() {
            prop_assert!(l.get(i, j) >= k2);
        }
        for (i, j) in sn.points.iter() {
            prop_assert!(l.get(i, j) <= -k1);
        }
    }

    #[test]
    fn denoise_is_a_contraction(seed in any::<u64>(), density in 0.05f64..0.9) {
        let mut r = rng(seed);
        let d = Dims::new(10, 12);
        let mut cur = edge_set(random_set(&mut r, d, density));
        for _ in 0..40 {
            let next = denoise_pass(&cur);
            prop_assert!(next.points.is_subset(&cur.points));
            if next.points == cur.points {
                break;
            }
            cur = next;
        }
        // once fixed, further passes change nothing
        let again = denoise_pass(&cur);
        prop_assert_eq!(&again.points, &denoise_pass(&again).points);
    }

    #[test]
    fn region_contains_selection_and_avoids_opposite(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = Dims::new(8, 9);
        let sel = random_set(&mut r, d, 0.2);
        prop_assume!(!sel.is_empty());
        let mut opp = random_set(&mut r, d, 0.2);
        for (i, j) in sel.iter() {
            opp.remove(i, j);
        }
        let region = iglim::extend_and_select(&edge_set(sel.clone()), &EdgePointSet {
            polarity: Polarity::Negative,
            points: opp.clone(),
        }).unwrap();
        prop_assert!(sel.is_subset(&region));
        prop_assert!(region.is_disjoint(&opp));
        let u0 = iglim::initial_field(&region);
        for (k, &v) in u0.as_slice().iter().enumerate() {
            prop_assert_eq!(v == 1.0, region.contains_index(k));
            prop_assert!(v == 1.0 || v == -1.0);
        }
    }
}
