//! Levenberg–Marquardt fits of the analytic crossover curve, on synthetic
//! data with known parameters in each of the three parameterizations.
//!
//!     cargo run --release --example crossover_fit

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rmtmix::fitting::{fit_crossover_ranged, Abscissa, CrossoverFitModel, DataPoint, FitOptions, ModelForm};

fn main() -> rmtmix::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let cases = [
        (ModelForm::ScaleShift, vec![0.28, -0.005]),
        (ModelForm::ScaleShiftAmplitude, vec![1.5, 0.03, 0.95]),
        (ModelForm::ShiftInside, vec![0.3, 0.2]),
    ];
    for (form, truth) in cases {
        let model = CrossoverFitModel::new(form, Abscissa::ScaledTime);
        let data: Vec<DataPoint> = (0..25)
            .map(|k| {
                let x = 10f64.powf(-2.0 + 3.0 * k as f64 / 24.0);
                let noise: f64 = rng.sample(StandardNormal);
                DataPoint::with_stderr(x, model.eval(&truth, x) + 0.002 * noise, 0.002)
            })
            .collect();
        let fit = fit_crossover_ranged(&data, &model, None, FitOptions::default())?;
        println!("{form:?}: truth {truth:?}");
        for ((name, p), se) in model.parameter_names().iter().zip(&fit.parameters).zip(&fit.standard_errors) {
            println!("  {name} = {p:.4} +- {se:.4}");
        }
        println!(
            "  {} points in x < {:.3}, residual {:.3}, {} iterations, converged {}",
            fit.points, fit.range.1, fit.residual, fit.iterations, fit.converged
        );
    }
    Ok(())
}
