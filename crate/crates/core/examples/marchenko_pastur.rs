//! Eigenvalue density of mixed states against the Marchenko–Pastur law,
//! for both rescalings, from a short GOE run through the runner.
//!
//!     cargo run --release --example marchenko_pastur -- [N] [M]

use rmtmix::gof::chi_square;
use rmtmix::runner::{run_experiment, ExperimentConfig, RunOptions};
use rmtmix::spectra::{marchenko_pastur_cdf, quarter_circle_cdf, DensityScaling, LAMBDA_TEST_BINS};

fn main() -> rmtmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(128, |a| a.parse().expect("N"));
    let m: u64 = args.next().map_or(40, |a| a.parse().expect("M"));
    let config = ExperimentConfig::from_toml_str(&format!(
        "[experiment]\nkind = \"goe-mix\"\nrealizations = {m}\n[system]\ndimension = {n}\n\
         [time_grid]\nvalues = [0.01, 1.0, 10.0, 100.0]\n[fit]\nenabled = false\n"
    ))?;
    let artifact = run_experiment(&config, &RunOptions::default())?;

    for t in &artifact.times {
        println!("N t = {}", t.grid_value);
        for (label, scaling) in [("lambda N", DensityScaling::TraceN), ("standardized", DensityScaling::Standardized)] {
            let d = t.statistics.density(scaling);
            let mp = chi_square(&d.lambda, LAMBDA_TEST_BINS, marchenko_pastur_cdf);
            let qc = chi_square(&d.sqrt_lambda, LAMBDA_TEST_BINS, quarter_circle_cdf);
            match (mp, qc) {
                (Ok(mp), Ok(qc)) => println!(
                    "  {label:>12}: MP chi2 = {:7.1} ({} dof) p = {:.3}   quarter circle p = {:.3}",
                    mp.statistic, mp.dof, mp.p_value, qc.p_value
                ),
                (Err(e), _) | (_, Err(e)) => println!("  {label:>12}: {e}"),
            }
        }
    }
    // With lambda N, the early-time spectrum is one eigenvalue near 1 and
    // N - 1 tiny ones, so the histogram only fills in once N t >> sqrt(N).
    Ok(())
}
