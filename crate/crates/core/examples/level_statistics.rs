//! Spacing ratios and spacing histograms of Hamiltonian spectra: GOE, GUE
//! and the `S + i alpha A` interpolation between them.
//!
//!     cargo run --release --example level_statistics -- [N] [samples]

use rmtmix::ensembles::{HamiltonianEnsembleSpec, HamiltonianSource};
use rmtmix::evolution::hamiltonian_eigenvalues;
use rmtmix::gof::chi_square;
use rmtmix::rng::{lane, RngStream};
use rmtmix::spectra::{
    wigner_surmise_cdf, SpectralSettings, SpectralStatistics, SpectrumSample, SymmetryClass, R_TILDE_GOE,
    R_TILDE_GUE,
};

fn main() -> rmtmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(200, |a| a.parse().expect("N"));
    let samples: u64 = args.next().map_or(40, |a| a.parse().expect("sample count"));
    // Hamiltonian spectra have no small-eigenvalue tail to cut.
    let settings = SpectralSettings { truncate: false, densities: false, ..Default::default() };

    println!("reference <r~>: GOE {R_TILDE_GOE}, GUE {R_TILDE_GUE}");
    let families = [
        ("GOE", HamiltonianEnsembleSpec::Goe { n }),
        ("alpha = 0.02", HamiltonianEnsembleSpec::Crossover { n, alpha: 0.02 }),
        ("alpha = 0.1", HamiltonianEnsembleSpec::Crossover { n, alpha: 0.1 }),
        ("alpha = 1", HamiltonianEnsembleSpec::Crossover { n, alpha: 1.0 }),
        ("GUE", HamiltonianEnsembleSpec::Gue { n }),
    ];
    for (name, spec) in families {
        let source = HamiltonianSource::new(spec)?;
        let mut stats = SpectralStatistics::new(settings.clone())?;
        for k in 0..samples {
            let h = source.sample(&RngStream::for_member(1, k, 0, lane::HAMILTONIAN))?;
            stats.push(&SpectrumSample::new(hamiltonian_eigenvalues(&h)?, 0.0, name, k), n)?;
        }
        let bins = 0..stats.spacing.bins();
        let p = |class| chi_square(&stats.spacing, bins.clone(), |s| wigner_surmise_cdf(s, class)).map(|c| c.p_value);
        println!(
            "{name:>13}: <r~> = {:.4} +- {:.4}   P(s) vs GOE p = {:.2e}, vs GUE p = {:.2e}",
            stats.ratio.mean(),
            stats.ratio.stderr(),
            p(SymmetryClass::Goe)?,
            p(SymmetryClass::Gue)?
        );
    }
    Ok(())
}
