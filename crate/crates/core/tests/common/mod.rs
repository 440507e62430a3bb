#![allow(dead_code)]

use aclbf_core::{Dims, Field, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(rng: &mut ChaCha8Rng, dims: Dims, lo: f64, hi: f64) -> Field {
    Field::from_fn(dims, |_, _| rng.random_range(lo..hi))
}

pub fn random_image(rng: &mut ChaCha8Rng, dims: Dims) -> GrayImage {
    GrayImage::new(random_field(rng, dims, 0.0, 1.0)).unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
