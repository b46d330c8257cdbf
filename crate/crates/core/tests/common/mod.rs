//! Helpers shared by the integration tests: an independent matrix
//! exponential and the one-magnon dispersion check.
#![allow(dead_code)]

use num_complex::Complex64;
use rmtmix::ensembles::{sample_real_state, HamiltonianEnsembleSpec, HamiltonianSource, PureState};
use rmtmix::evolution::{build_propagator, mixed_states, KrylovOptions, MixingOptions, PropagationMethod};
use rmtmix::rng::{lane, RngStream};
use rmtmix::spin_chain::{one_excitation_hamiltonian, DisorderRealization};

type Dense = Vec<Vec<Complex64>>;

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// `exp(a)` by scaling and squaring of a 30-term Taylor series.
pub fn expm(a: &Dense) -> Dense {
    let n = a.len();
    let norm = (0..n).map(|j| (0..n).map(|i| a[i][j].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scale = 2f64.powi(-s);
    let x: Dense = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut result: Dense = (0..n)
        .map(|i| (0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let mut term = result.clone();
    for k in 1..=30 {
        term = matmul(&term, &x);
        term.iter_mut().flatten().for_each(|v| *v /= k as f64);
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = matmul(&result, &result);
    }
    result
}

/// Largest entry-wise deviation of the library's mixed states from
/// `(1/n) sum_l exp(-i H_l t) |psi><psi| exp(i H_l t)` built with [`expm`],
/// over exact and Krylov propagation and several families and times.
pub fn oracle_max_error(n: usize, seed: u64) -> f64 {
    let times = [0.0, 0.25, 1.3, 7.9];
    let mut families = vec![
        HamiltonianEnsembleSpec::Goe { n },
        HamiltonianEnsembleSpec::Gue { n },
        HamiltonianEnsembleSpec::Crossover { n, alpha: 0.3 },
        HamiltonianEnsembleSpec::SpinOneExcitation { chain_length: n, disorder: 0.7 },
    ];
    if n == 6 {
        families.push(HamiltonianEnsembleSpec::SpinHalfFilling { chain_length: 4, disorder: 0.5 });
    }
    let mut worst: f64 = 0.0;
    for (f, spec) in families.into_iter().enumerate() {
        let src = HamiltonianSource::new(spec).unwrap();
        let psi0 = sample_real_state(n, &RngStream::for_member(seed, f as u64, 0, lane::INITIAL_STATE)).unwrap();
        let hs: Vec<_> = (0..n)
            .map(|l| src.sample(&RngStream::for_member(seed, f as u64, l as u64, lane::HAMILTONIAN)).unwrap())
            .collect();
        let expected: Vec<Dense> = times.iter().map(|&t| oracle_density(&hs, &psi0, t)).collect();
        for method in [PropagationMethod::Exact, PropagationMethod::Krylov] {
            let props: Vec<_> = hs
                .iter()
                .map(|h| build_propagator(h, &psi0, &times, method, KrylovOptions::default()).unwrap())
                .collect();
            let rhos = mixed_states(&props, &times, MixingOptions::default()).unwrap();
            for (rho, want) in rhos.iter().zip(&expected) {
                let e = rho.entries();
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((e[(i, j)] - want[i][j]).norm());
                    }
                }
            }
        }
    }
    worst
}

fn oracle_density(hs: &[rmtmix::ensembles::Hamiltonian], psi0: &PureState, t: f64) -> Dense {
    let n = psi0.dim();
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for h in hs {
        let h = h.to_hermitian();
        let a: Dense = (0..n)
            .map(|i| (0..n).map(|j| h.get(i, j) * Complex64::new(0.0, -t)).collect())
            .collect();
        let u = expm(&a);
        let psi: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| u[i][j] * psi0.amplitudes()[j]).sum()).collect();
        for i in 0..n {
            for j in 0..n {
                rho[i][j] += psi[i] * psi[j].conj() / n as f64;
            }
        }
    }
    rho
}

/// Largest deviation of the clean one-excitation spectrum from
/// `(L/4 - 1) + cos(2 pi j / L)`.
pub fn magnon_dispersion_error(chain_length: usize) -> f64 {
    let clean = DisorderRealization {
        fields: vec![0.0; chain_length],
        strength: 0.0,
    };
    let h = one_excitation_hamiltonian(chain_length, &clean).unwrap();
    let mut got = h.as_ref().self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    got.sort_by(f64::total_cmp);
    let l = chain_length as f64;
    let mut want: Vec<f64> = (0..chain_length)
        .map(|j| (l / 4.0 - 1.0) + (2.0 * std::f64::consts::PI * j as f64 / l).cos())
        .collect();
    want.sort_by(f64::total_cmp);
    got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
