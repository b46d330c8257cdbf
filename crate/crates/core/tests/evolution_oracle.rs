//! Propagation against an independent matrix exponential.

mod common;

use common::{expm, magnon_dispersion_error, oracle_max_error};
use num_complex::Complex64;

#[test]
fn expm_of_pauli_rotation() {
    // exp(-i theta sigma_x) = cos(theta) 1 - i sin(theta) sigma_x
    let theta = 0.7;
    let z = Complex64::new(0.0, 0.0);
    let a = vec![vec![z, Complex64::new(0.0, -theta)], vec![Complex64::new(0.0, -theta), z]];
    let u = expm(&a);
    assert!((u[0][0] - Complex64::new(theta.cos(), 0.0)).norm() < 1e-14);
    assert!((u[0][1] - Complex64::new(0.0, -theta.sin())).norm() < 1e-14);
}

#[test]
fn mixed_states_match_matrix_exponential() {
    for n in 2..=8 {
        let err = oracle_max_error(n, 100 + n as u64);
        assert!(err < 1e-9, "n = {n}: {err:e}");
    }
}

#[test]
fn one_magnon_dispersion() {
    for l in [3, 4, 6, 16, 64] {
        let err = magnon_dispersion_error(l);
        assert!(err < 1e-10, "L = {l}: {err:e}");
    }
}
