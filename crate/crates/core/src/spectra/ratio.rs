//! Ratios of consecutive level spacings.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `<r~>` fitted for large GOE matrices.
pub const R_TILDE_GOE: f64 = 0.5307;
/// `<r~>` fitted for large GUE matrices.
pub const R_TILDE_GUE: f64 = 0.5996;
/// `2 ln 2 - 1`, uncorrelated (Poisson) levels.
pub const R_TILDE_POISSON: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;
/// Halfway between the GOE and GUE values; used to locate the crossover.
pub const R_TILDE_MIDPOINT: f64 = 0.5 * (R_TILDE_GOE + R_TILDE_GUE);

/// Largest argument at which the crossover curve is evaluated; its
/// `1 - tau^2` denominators have a removable singularity at `tau = 1`.
pub const TAU_MAX: f64 = 1.0 - 1e-6;

/// Spacings this small relative to the spectrum scale count as degenerate.
fn degenerate_threshold(eigs: &[f64]) -> f64 {
    let scale = eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    4.0 * f64::EPSILON * scale
}

/// All `r~_i = min(r_i, 1/r_i)` of an ascending spectrum, with the number of
/// ratios skipped because one of their spacings is degenerate.
pub fn r_tilde_values(eigs: &[f64]) -> Result<(Vec<f64>, u64)> {
    if eigs.len() < 3 {
        return Err(Error::Domain(format!(
            "spacing ratios need at least 3 eigenvalues, got {}",
            eigs.len()
        )));
    }
    if eigs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("eigenvalues must be ascending".into()));
    }
    let tiny = degenerate_threshold(eigs);
    let mut out = Vec::with_capacity(eigs.len() - 2);
    let mut skipped = 0;
    for w in eigs.windows(3) {
        let (d0, d1) = (w[1] - w[0], w[2] - w[1]);
        if d0 <= tiny || d1 <= tiny {
            skipped += 1;
            continue;
        }
        out.push(d0.min(d1) / d0.max(d1));
    }
    Ok((out, skipped))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RTildeMean {
    pub mean: f64,
    /// Standard error treating the ratios as independent.
    pub stderr: f64,
    pub count: u64,
    pub skipped: u64,
}

/// Mean of `r~` over one spectrum.
pub fn r_tilde_mean(eigs: &[f64]) -> Result<RTildeMean> {
    let (values, skipped) = r_tilde_values(eigs)?;
    let mut acc = RatioAccumulator::default();
    acc.push_values(&values, skipped);
    if acc.count == 0 {
        return Err(Error::Domain("every spacing ratio is degenerate".into()));
    }
    Ok(RTildeMean {
        mean: acc.mean(),
        stderr: acc.pooled_stderr(),
        count: acc.count,
        skipped,
    })
}

/// Pools `r~` over many spectra. Each pushed spectrum is one realization;
/// the standard error comes from the spread of the realization means, which
/// absorbs correlations between ratios of one spectrum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioAccumulator {
    pub(crate) sum: f64,
    pub(crate) sum_sq: f64,
    pub(crate) count: u64,
    pub(crate) skipped: u64,
    pub(crate) realizations: u64,
    pub(crate) sum_means: f64,
    pub(crate) sum_means_sq: f64,
}

impl RatioAccumulator {
    pub fn push_spectrum(&mut self, eigs: &[f64]) -> Result<()> {
        let (values, skipped) = r_tilde_values(eigs)?;
        self.push_values(&values, skipped);
        Ok(())
    }

    pub fn push_values(&mut self, values: &[f64], skipped: u64) {
        self.skipped += skipped;
        if values.is_empty() {
            return;
        }
        let s: f64 = values.iter().sum();
        self.sum += s;
        self.sum_sq += values.iter().map(|x| x * x).sum::<f64>();
        self.count += values.len() as u64;
        let m = s / values.len() as f64;
        self.realizations += 1;
        self.sum_means += m;
        self.sum_means_sq += m * m;
    }

    pub fn merge(&mut self, other: &Self) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
        self.skipped += other.skipped;
        self.realizations += other.realizations;
        self.sum_means += other.sum_means;
        self.sum_means_sq += other.sum_means_sq;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn realizations(&self) -> u64 {
        self.realizations
    }

    /// Pooled mean over all ratios.
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn pooled_stderr(&self) -> f64 {
        let n = self.count as f64;
        let m = self.mean();
        ((self.sum_sq / n - m * m).max(0.0) / (n - 1.0)).sqrt()
    }

    /// Spread of realization means; falls back to the pooled error with a
    /// single realization.
    pub fn stderr(&self) -> f64 {
        let k = self.realizations as f64;
        if self.realizations < 2 {
            return self.pooled_stderr();
        }
        let m = self.sum_means / k;
        let var = (self.sum_means_sq - k * m * m).max(0.0) / (k - 1.0);
        (var / k).sqrt()
    }
}

/// Mean `r~` along the GOE to GUE crossover of 3x3 matrices as a function of
/// the mixing parameter `tau` in `[0, 1]`.
///
/// `tau = 0` is evaluated as the limit `4 - 2 sqrt 3`; values above
/// [`TAU_MAX`] are evaluated at `TAU_MAX`.
pub fn r_tilde_crossover(tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau must lie in [0, 1], got {tau}")));
    }
    Ok(r_tilde_crossover_clamped(tau))
}

/// [`r_tilde_crossover`] with `tau` clamped into `[0, TAU_MAX]`.
///
/// The first and third arctangent terms both grow like `1/(1 - tau^2)` and
/// cancel near `tau = 1`. Writing their angles as `pi/3 + dA` and
/// `pi/6 + dC`, with `dA`, `dC` from the arctangent difference formula,
/// leaves `-1/6 + [4(2 + tau^2) dA - (17 + 7 tau^2) dC] / (pi (1 - tau^2))`,
/// which has no cancellation.
pub fn r_tilde_crossover_clamped(tau: f64) -> f64 {
    let t = tau.clamp(0.0, TAU_MAX);
    let s3 = 3f64.sqrt();
    let t2 = t * t;
    let q = 1.0 - t2;
    let d_a = (s3 * (1.0 - t) * (1.0 - t) / (2.0 * t + 3.0 * (1.0 + t2))).atan();
    let d_c = (s3 * (t - 1.0) / (3.0 + t)).atan();
    let ac = -1.0 / 6.0 + (4.0 * (2.0 + t2) * d_a - (17.0 + 7.0 * t2) * d_c) / (PI * q);
    let q32 = q * q.sqrt();
    let b = 4.0 * s3 / (PI * q32) * q32.atan2(t * (3.0 + t2));
    let d = (s3 * t).atan() / PI;
    ac - b - d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn equal_spacings() {
        let r = r_tilde_mean(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.count, 3);
    }

    #[test]
    fn poisson_levels() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut x = 0.0;
        let levels: Vec<f64> = (0..1_000_002)
            .map(|_| {
                x += <Exp1 as Distribution<f64>>::sample(&Exp1, &mut rng);
                x
            })
            .collect();
        let r = r_tilde_mean(&levels).unwrap();
        assert!((r.mean - R_TILDE_POISSON).abs() < 0.002, "{}", r.mean);
    }

    #[test]
    fn degenerate_spacings_are_skipped() {
        let (values, skipped) = r_tilde_values(&[0.0, 1.0, 1.0, 2.0, 3.5]).unwrap();
        assert_eq!(skipped, 2);
        assert_eq!(values, vec![1.0 / 1.5]);
        assert!(r_tilde_values(&[0.0, 1.0]).is_err());
        assert!(r_tilde_values(&[0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn affine_invariance() {
        let eigs = [-1.3, -0.2, 0.05, 0.9, 1.7, 3.1];
        let base = r_tilde_mean(&eigs).unwrap().mean;
        let moved: Vec<f64> = eigs.iter().map(|x| 2.5 * x + 7.0).collect();
        assert!((r_tilde_mean(&moved).unwrap().mean - base).abs() < 1e-14);
    }

    #[test]
    fn crossover_curve_limits_and_monotonicity() {
        assert!((r_tilde_crossover(0.0).unwrap() - (4.0 - 2.0 * 3f64.sqrt())).abs() < 1e-12);
        assert!((r_tilde_crossover(1e-9).unwrap() - 0.535898).abs() < 1e-6);
        let top = r_tilde_crossover(1.0).unwrap();
        assert!((top - 0.6027).abs() < 1e-4, "{top}");
        let mut prev = 0.0;
        for k in 0..=1000 {
            let v = r_tilde_crossover(k as f64 / 1000.0).unwrap();
            assert!(v.is_finite() && v >= prev - 1e-12, "k={k}");
            prev = v;
        }
        assert!(r_tilde_crossover(1.0 - 1e-9).unwrap().is_finite());
        assert!(r_tilde_crossover(-0.1).is_err());
        assert!(r_tilde_crossover(1.1).is_err());
    }

    #[test]
    fn accumulator_merge_is_exact_concatenation() {
        let spectra = [
            vec![0.0, 0.7, 1.1, 2.0, 2.2, 3.0],
            vec![0.0, 0.3, 1.4, 1.5, 2.9],
            vec![1.0, 1.6, 1.9, 2.8],
        ];
        let mut all = RatioAccumulator::default();
        spectra.iter().for_each(|s| all.push_spectrum(s).unwrap());
        let mut a = RatioAccumulator::default();
        let mut b = RatioAccumulator::default();
        a.push_spectrum(&spectra[0]).unwrap();
        b.push_spectrum(&spectra[1]).unwrap();
        b.push_spectrum(&spectra[2]).unwrap();
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.mean() - all.mean()).abs() < 1e-15);
        assert!((a.stderr() - all.stderr()).abs() < 1e-15);
    }
}
