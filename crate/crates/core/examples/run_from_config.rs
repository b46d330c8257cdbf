//! Runs a config file (or preset name) and prints a per-time table of the
//! statistics the crossover is judged by.
//!
//! ```text
//! cargo run --release --example run_from_config -- examples/configs/goe_small.toml [artifact-dir]
//! ```

use std::path::{Path, PathBuf};

use rmtmix::gof::chi_square;
use rmtmix::runner::{presets, run_experiment, ExperimentConfig, RunOptions};
use rmtmix::spectra::{
    marchenko_pastur_cdf, wigner_surmise_cdf, DensityScaling, SymmetryClass, LAMBDA_TEST_BINS,
};

fn main() -> rmtmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let source = args.next().unwrap_or_else(|| "examples/configs/goe_small.toml".into());
    let config = if Path::new(&source).exists() {
        ExperimentConfig::load(Path::new(&source))?
    } else {
        presets::find(&source)?.config()?
    };
    let opts = RunOptions {
        output: args.next().map(PathBuf::from),
        ..Default::default()
    };
    let artifact = run_experiment(&config, &opts)?;
    let n = artifact.dimension();
    println!(
        "{} N = {n}, M = {}, {:.1} s",
        config.kind().as_str(),
        artifact.realizations_completed,
        artifact.wall_seconds
    );
    println!("{:>10} {:>10} {:>15} {:>9} {:>9} {:>9} {:>9} {:>7}", "t", "N t", "<r~>", "p(MP)", "p(GOE)", "p(GUE)", "purity", "<s>");
    for t in &artifact.times {
        let s = &t.statistics;
        let mp = chi_square(&s.density(DensityScaling::Standardized).lambda, LAMBDA_TEST_BINS, marchenko_pastur_cdf)
            .map_or(f64::NAN, |c| c.p_value);
        let bins = 0..s.spacing.bins();
        let p = |class| {
            chi_square(&s.spacing, bins.clone(), |x| wigner_surmise_cdf(x, class)).map_or(f64::NAN, |c| c.p_value)
        };
        println!(
            "{:>10.4} {:>10.4} {:>8.4}±{:.4} {:>9.2e} {:>9.2e} {:>9.2e} {:>9.5} {:>7.4}",
            t.time,
            t.time * n as f64,
            s.ratio.mean(),
            s.ratio.stderr(),
            mp,
            p(SymmetryClass::Goe),
            p(SymmetryClass::Gue),
            t.diagnostics.mean_purity(),
            s.mean_unfolded_spacing()
        );
    }
    for f in &artifact.fits {
        let names = f.model.parameter_names();
        let params: Vec<String> = names
            .iter()
            .zip(f.result.parameters.iter().zip(&f.result.standard_errors))
            .map(|(k, (v, e))| format!("{k} = {v:.4} ± {e:.4}"))
            .collect();
        println!("fit {:?}: {} (converged: {})", f.model.form, params.join(", "), f.result.converged);
    }
    if let Some(e) = &artifact.fit_error {
        println!("fit failed: {e}");
    }
    Ok(())
}
