//! Disordered Heisenberg chains: subspace sizes, the clean one-magnon band,
//! and short mixing runs in the half-filling and one-excitation sectors.
//!
//!     cargo run --release --example spin_chain_mixing -- [M]

use rmtmix::runner::{run_experiment, ExperimentConfig, RunOptions};
use rmtmix::spin_chain::{binomial, build_basis, one_excitation_hamiltonian, DisorderRealization};

fn main() -> rmtmix::Result<()> {
    let m: u64 = std::env::args().nth(1).map_or(6, |a| a.parse().expect("M"));

    for l in [8, 10, 12] {
        let basis = build_basis(l, l / 2)?;
        println!("L = {l:>2}: half filling has {} states (C(L, L/2) = {})", basis.len(), binomial(l, l / 2));
    }

    let l = 8;
    let clean = DisorderRealization { fields: vec![0.0; l], strength: 0.0 };
    let h = one_excitation_hamiltonian(l, &clean)?;
    let mut band = h.as_ref().self_adjoint_eigenvalues(faer::Side::Lower).expect("eigenvalues");
    band.sort_by(f64::total_cmp);
    println!("clean one-magnon band, L = {l} (expect L/4 - 1 + cos(2 pi j / L)): {band:.4?}");

    for (kind, system) in [
        ("spin-hf", "chain_length = 8\ndisorder = 0.5"),
        ("spin-oe", "chain_length = 64\ndisorder = 0.1"),
    ] {
        let config = ExperimentConfig::from_toml_str(&format!(
            "[experiment]\nkind = \"{kind}\"\nrealizations = {m}\n[system]\n{system}\n\
             [time_grid]\nvalues = [0.01, 1.0, 100.0]\n[fit]\nenabled = false\n"
        ))?;
        let a = run_experiment(&config, &RunOptions::default())?;
        println!("{kind}, N = {}, M = {m}:", a.dimension());
        for t in &a.times {
            println!(
                "  t = {:>6}: <r~> = {:.4} +- {:.4}, mean purity {:.4}",
                t.time,
                t.statistics.ratio.mean(),
                t.statistics.ratio.stderr(),
                t.diagnostics.mean_purity()
            );
        }
    }
    Ok(())
}
