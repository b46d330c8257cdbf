//! One realization of the mixing protocol: N GOE Hamiltonians evolve the
//! same basis state, and the spectrum of the averaged projector moves from
//! GOE to GUE statistics around t ~ 1/N.
//!
//!     cargo run --release --example goe_crossover -- [N]

use faer::Mat;
use num_complex::Complex64;
use rmtmix::ensembles::{basis_state, HamiltonianEnsembleSpec, HamiltonianSource};
use rmtmix::evolution::{assemble_density, build_propagator, purity, KrylovOptions, PropagationMethod};
use rmtmix::rng::{lane, RngStream};
use rmtmix::spectra::{central_bulk, r_tilde_mean, truncate_spectrum};

fn main() -> rmtmix::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(256, |a| a.parse().expect("N"));
    let nt = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    let times: Vec<f64> = nt.iter().map(|x| x / n as f64).collect();
    let source = HamiltonianSource::new(HamiltonianEnsembleSpec::Goe { n })?;
    let psi0 = basis_state(n, 0)?;

    // Column l of states[k] is exp(-i H_l t_k) |0>.
    let mut states: Vec<Mat<Complex64>> = times.iter().map(|_| Mat::zeros(n, n)).collect();
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..n {
        let h = source.sample(&RngStream::for_member(7, 0, l as u64, lane::HAMILTONIAN))?;
        let p = build_propagator(&h, &psi0, &times, PropagationMethod::Auto, KrylovOptions::default())?;
        for (k, &t) in times.iter().enumerate() {
            p.write_state(t, &mut column);
            states[k].col_mut(l).iter_mut().zip(&column).for_each(|(d, s)| *d = *s);
        }
    }

    println!("{:>8} {:>10} {:>8} {:>8}", "N t", "purity", "levels", "<r~>");
    for (k, &t) in times.iter().enumerate() {
        let rho = assemble_density(states[k].as_ref(), t);
        let eigs = rho.eigenvalues()?;
        let kept = truncate_spectrum(&eigs, 1e-12).kept;
        let r = r_tilde_mean(central_bulk(&kept, 0.6)?)?;
        println!("{:>8} {:>10.6} {:>8} {:>8.4}", nt[k], purity(&rho), kept.len(), r.mean);
    }
    Ok(())
}
