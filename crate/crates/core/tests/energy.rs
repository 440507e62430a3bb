mod common;

use aclbf_core::etd::{compute_stabilizer, etd1_step};
use aclbf_core::model::{
    discrete_energy, double_well_prime, neumann_dirichlet_sum, nonlinear_term,
};
use aclbf_core::{Dims, Field, MatrixDct, ModelParams, SpectralOperator, StabilizerPolicy};
use aclbf_oracles as oracle;
use common::{random_field, rng};
use proptest::prelude::*;

fn energy_params(p: &ModelParams) -> oracle::EnergyParams {
    oracle::EnergyParams {
        eps: p.eps,
        eps1: p.eps1,
        mu: p.mu,
        lambda1: p.lambda1,
        lambda2: p.lambda2,
        h: p.h,
    }
}

#[test]
fn energy_matches_dense_quadratic_form() {
    let mut r = rng(41);
    let d = Dims::new(6, 6);
    for p in [
        ModelParams::default(),
        ModelParams {
            h: 1.0,
            mu: 3.0,
            lambda1: 1.5,
            lambda2: 0.7,
            ..ModelParams::default()
        },
    ] {
        let u = random_field(&mut r, d, -1.5, 1.5);
        let e1 = random_field(&mut r, d, 0.0, 0.2);
        let e2 = random_field(&mut r, d, 0.0, 0.2);
        let fast = discrete_energy(&u, &e1, &e2, &p);
        let slow = oracle::dense_energy(
            u.as_slice(),
            e1.as_slice(),
            e2.as_slice(),
            6,
            6,
            energy_params(&p),
        )
        .unwrap();
        assert!(
            (fast - slow).abs() < 1e-10 * slow.abs().max(1.0),
            "{fast} vs {slow}"
        );
    }
}

#[test]
fn nonlinear_term_elementwise() {
    let mut r = rng(42);
    let d = Dims::new(5, 4);
    let p = ModelParams {
        lambda1: 1.3,
        lambda2: 0.6,
        ..ModelParams::default()
    };
    let u = random_field(&mut r, d, -2.0, 2.0);
    let e1 = random_field(&mut r, d, 0.0, 0.3);
    let e2 = random_field(&mut r, d, 0.0, 0.3);
    let s = 12.5;
    let n = nonlinear_term(&u, &e1, &e2, s, &p);
    for k in 0..d.len() {
        let v = u.as_slice()[k];
        let want = s * v
            - oracle::scalar::double_well_prime_fd(v) / p.eps
            - p.mu
                * oracle::scalar::delta(v, p.eps1)
                * (p.lambda1 * e1.as_slice()[k] - p.lambda2 * e2.as_slice()[k]);
        assert!((n.as_slice()[k] - want).abs() < 1e-7 * (1.0 + want.abs()));
        assert!((double_well_prime(v) - oracle::scalar::double_well_prime_fd(v)).abs() < 1e-8);
    }
}

#[test]
fn etd1_decays_energy_with_frozen_forces() {
    let mut r = rng(43);
    let d = Dims::new(12, 10);
    let p = ModelParams::default();
    let dct = MatrixDct::new(d);
    for dt in [0.1, 1.0, 10.0] {
        let mut u = random_field(&mut r, d, -1.0, 1.0);
        let e1 = random_field(&mut r, d, 0.0, 0.05);
        let e2 = random_field(&mut r, d, 0.0, 0.05);
        let s = compute_stabilizer(&e1, &e2, &p, StabilizerPolicy::Auto).unwrap();
        let op = SpectralOperator::new(d, p.h, p.eps, s, dt).unwrap();
        let mut prev = discrete_energy(&u, &e1, &e2, &p);
        for _ in 0..30 {
            u = etd1_step(&u, &nonlinear_term(&u, &e1, &e2, s, &p), &op, &dct);
            let e = discrete_energy(&u, &e1, &e2, &p);
            assert!(e <= prev + 1e-8 * prev.abs(), "Δt={dt}: {prev} -> {e}");
            prev = e;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_term_is_nonnegative(rows in 1usize..=9, cols in 1usize..=9, seed in any::<u64>(), h in 0.01f64..2.0) {
        let mut r = rng(seed);
        let d = Dims::new(rows, cols);
        let u = random_field(&mut r, d, -3.0, 3.0);
        let fast = neumann_dirichlet_sum(&u);
        prop_assert!(fast >= 0.0);
        let du = oracle::apply_dense_laplacian(u.as_slice(), rows, cols, h).unwrap();
        let quad: f64 = u.as_slice().iter().zip(&du).map(|(a, b)| a * b).sum();
        prop_assert!(quad <= 1e-9 / (h * h));
        prop_assert!((fast + h * h * quad).abs() < 1e-9 * (1.0 + fast));
    }

    #[test]
    fn gradient_term_vanishes_on_constants(c in -5.0f64..5.0) {
        prop_assert_eq!(neumann_dirichlet_sum(&Field::constant(Dims::new(4, 7), c)), 0.0);
    }
}
