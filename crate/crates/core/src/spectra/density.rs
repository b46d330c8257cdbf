//! Reference densities: Marchenko–Pastur, quarter circle, Wigner surmise and
//! the asymptotic level number variance.

use std::f64::consts::PI;

use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Goe,
    Gue,
}

/// `(1/2 pi) sqrt(4/x - 1)` on `(0, 4]`; `+inf` at 0, zero outside.
pub fn marchenko_pastur_pdf(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else if x > 0.0 && x <= 4.0 {
        (4.0 / x - 1.0).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// `(1/pi) sqrt(4 - y^2)` on `[0, 2]`.
pub fn quarter_circle_pdf(y: f64) -> f64 {
    if (0.0..=2.0).contains(&y) {
        (4.0 - y * y).sqrt() / PI
    } else {
        0.0
    }
}

/// CDF of the quarter circle: `(1/pi)[(y/2) sqrt(4 - y^2) + 2 asin(y/2)]`.
pub fn quarter_circle_cdf(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 2.0 {
        1.0
    } else {
        (0.5 * y * (4.0 - y * y).sqrt() + 2.0 * (0.5 * y).asin()) / PI
    }
}

/// CDF of the Marchenko–Pastur law, through `y = sqrt(x)`.
pub fn marchenko_pastur_cdf(x: f64) -> f64 {
    quarter_circle_cdf(x.max(0.0).sqrt())
}

/// Nearest-neighbour spacing surmise: `(pi/2) s exp(-pi s^2/4)` for GOE,
/// `(32/pi^2) s^2 exp(-4 s^2/pi)` for GUE.
pub fn wigner_surmise(s: f64, class: SymmetryClass) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("spacing must be nonnegative, got {s}")));
    }
    Ok(match class {
        SymmetryClass::Goe => 0.5 * PI * s * (-0.25 * PI * s * s).exp(),
        SymmetryClass::Gue => 32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp(),
    })
}

pub fn wigner_surmise_cdf(s: f64, class: SymmetryClass) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    match class {
        SymmetryClass::Goe => 1.0 - (-0.25 * PI * s * s).exp(),
        SymmetryClass::Gue => {
            erf(2.0 * s / PI.sqrt()) - 4.0 * s / PI * (-4.0 * s * s / PI).exp()
        }
    }
}

/// Large-`l` number variance `Sigma^2(l)` of the Gaussian ensembles.
pub fn number_variance_asymptotic(l: f64, class: SymmetryClass) -> f64 {
    let base = (2.0 * PI * l).ln() + EULER_GAMMA + 1.0;
    match class {
        SymmetryClass::Goe => 2.0 / (PI * PI) * (base - PI * PI / 8.0),
        SymmetryClass::Gue => base / (PI * PI),
    }
}

/// How density-matrix eigenvalues are brought to the Marchenko–Pastur scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DensityScaling {
    /// `lambda * N`: unit mean by the trace condition.
    TraceN,
    /// Largest eigenvalue removed, the rest divided by their sample standard
    /// deviation. For the Marchenko–Pastur law mean and standard deviation
    /// coincide, so this also gives unit mean, and it stays meaningful at
    /// early times when one eigenvalue still carries almost all the weight.
    Standardized,
}

/// `lambda * n`.
pub fn rescale_eigenvalues(eigs: &[f64], n: usize) -> Vec<f64> {
    let nf = n as f64;
    eigs.iter().map(|x| x * nf).collect()
}

/// See [`DensityScaling::Standardized`]. Needs at least three values.
pub fn standardize_eigenvalues(eigs: &[f64]) -> Result<Vec<f64>> {
    if eigs.len() < 3 {
        return Err(Error::Domain("standardization needs at least 3 eigenvalues".into()));
    }
    let mut rest = eigs.to_vec();
    rest.sort_by(f64::total_cmp);
    rest.pop();
    let k = rest.len() as f64;
    let mean = rest.iter().sum::<f64>() / k;
    let sd = (rest.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Domain("eigenvalues have zero spread".into()));
    }
    Ok(rest.iter().map(|x| x / sd).collect())
}

pub fn scale_eigenvalues(eigs: &[f64], n: usize, scaling: DensityScaling) -> Result<Vec<f64>> {
    match scaling {
        DensityScaling::TraceN => Ok(rescale_eigenvalues(eigs, n)),
        DensityScaling::Standardized => standardize_eigenvalues(eigs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint rule on `[0, 4]` after `x = 4 sin^2(theta)`, which smooths
    /// both square-root edges of the Marchenko–Pastur support.
    fn integrate_mp(f: impl Fn(f64) -> f64, steps: usize) -> f64 {
        let h = std::f64::consts::FRAC_PI_2 / steps as f64;
        (0..steps)
            .map(|k| {
                let (s, c) = ((k as f64 + 0.5) * h).sin_cos();
                f(4.0 * s * s) * 8.0 * s * c * h
            })
            .sum()
    }

    #[test]
    fn marchenko_pastur_values_and_moments() {
        assert!((marchenko_pastur_pdf(1.0) - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(marchenko_pastur_pdf(4.0), 0.0);
        assert_eq!(marchenko_pastur_pdf(5.0), 0.0);
        let mass = integrate_mp(marchenko_pastur_pdf, 20_000);
        let mean = integrate_mp(|x| x * marchenko_pastur_pdf(x), 20_000);
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        assert!((mean - 1.0).abs() < 1e-6, "{mean}");
        for x in [0.01, 0.3, 1.0, 2.5, 3.9] {
            let h = 1e-6;
            let d = (marchenko_pastur_cdf(x + h) - marchenko_pastur_cdf(x - h)) / (2.0 * h);
            assert!((d - marchenko_pastur_pdf(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn quarter_circle_values_and_change_of_variables() {
        assert!((quarter_circle_pdf(0.0) - 2.0 / PI).abs() < 1e-15);
        assert_eq!(quarter_circle_pdf(2.0), 0.0);
        for k in 1..400 {
            let x = k as f64 / 100.0;
            let y = x.sqrt();
            let lhs = quarter_circle_pdf(y) / (2.0 * y);
            assert!((lhs - marchenko_pastur_pdf(x)).abs() < 1e-12, "x={x}");
        }
        assert!((quarter_circle_cdf(2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn surmise_values_and_moments() {
        for class in [SymmetryClass::Goe, SymmetryClass::Gue] {
            assert_eq!(wigner_surmise(0.0, class).unwrap(), 0.0);
            let p = |s: f64| wigner_surmise(s, class).unwrap();
            let n = 200_000;
            let h = 12.0 / n as f64;
            let (mut mass, mut mean) = (0.0, 0.0);
            for k in 0..n {
                let s = (k as f64 + 0.5) * h;
                mass += p(s) * h;
                mean += s * p(s) * h;
            }
            assert!((mass - 1.0).abs() < 1e-8, "{class:?} {mass}");
            assert!((mean - 1.0).abs() < 1e-8, "{class:?} {mean}");
            let s = 0.8;
            let d = (wigner_surmise_cdf(s + 1e-6, class) - wigner_surmise_cdf(s - 1e-6, class)) / 2e-6;
            assert!((d - p(s)).abs() < 1e-6);
        }
        let goe1 = wigner_surmise(1.0, SymmetryClass::Goe).unwrap();
        assert!((goe1 - 0.5 * PI * (-0.25 * PI).exp()).abs() < 1e-15);
        assert!((goe1 - 0.716186).abs() < 1e-6);
        assert!(wigner_surmise(-0.1, SymmetryClass::Goe).is_err());
    }

    #[test]
    fn number_variance_reference() {
        let v = number_variance_asymptotic(1.0, SymmetryClass::Goe);
        assert!((v - 0.4421).abs() < 1e-4, "{v}");
        assert!(number_variance_asymptotic(5.0, SymmetryClass::Gue) < number_variance_asymptotic(5.0, SymmetryClass::Goe));
    }

    #[test]
    fn scalings() {
        let mixed = vec![0.125; 8];
        assert!(rescale_eigenvalues(&mixed, 8).iter().all(|&x| x == 1.0));
        let eigs = [0.1, 0.2, 0.3, 0.4];
        let mean = rescale_eigenvalues(&eigs, 4).iter().sum::<f64>() / 4.0;
        assert!((mean - 1.0).abs() < 1e-12);
        let st = standardize_eigenvalues(&[0.9, 0.01, 0.02, 0.03]).unwrap();
        assert_eq!(st.len(), 3);
        assert!((st[1] - 2.0).abs() < 1e-12);
    }
}
