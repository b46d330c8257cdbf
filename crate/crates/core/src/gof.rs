//! Goodness-of-fit tests: binned chi-square and Kolmogorov–Smirnov.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::spectra::histogram::Histogram;

/// Pearson chi-square of a histogram against a reference distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins left after merging sparse neighbours.
    pub bins_used: usize,
    pub samples: u64,
}

/// Minimum expected count per bin; sparser neighbours are merged.
pub const MIN_EXPECTED: f64 = 5.0;

/// Tests the bins `first..first+len` of `hist` against the distribution with
/// CDF `cdf`. Expected counts are conditional on the observed total in those
/// bins, so the range may cut away part of the support.
pub fn chi_square(
    hist: &Histogram,
    bins: std::ops::Range<usize>,
    cdf: impl Fn(f64) -> f64,
) -> Result<ChiSquare> {
    if bins.is_empty() || bins.end > hist.bins() {
        return Err(Error::Config(format!(
            "bin range {bins:?} invalid for {} bins",
            hist.bins()
        )));
    }
    let edges = hist.edges();
    let counts = &hist.counts()[bins.clone()];
    let lo = edges[bins.start];
    let hi = edges[bins.end];
    let mass = cdf(hi) - cdf(lo);
    if !(mass > 0.0) {
        return Err(Error::Domain("reference distribution has no mass on the tested range".into()));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::Domain("no samples in the tested range".into()));
    }
    let nf = n as f64;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (k, &c) in counts.iter().enumerate() {
        let a = edges[bins.start + k];
        let b = edges[bins.start + k + 1];
        obs += c as f64;
        exp += nf * (cdf(b) - cdf(a)) / mass;
        if exp >= MIN_EXPECTED {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => cells.push((obs, exp)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::Domain("fewer than two populated cells after merging".into()));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        bins_used: cells.len(),
        samples: n,
    })
}

/// Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KolmogorovSmirnov {
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// One-sample test of `samples` against `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KolmogorovSmirnov> {
    if samples.is_empty() {
        return Err(Error::Domain("KS test needs samples".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KolmogorovSmirnov {
        statistic: d,
        p_value: ks_p(d, n),
    })
}

/// Two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KolmogorovSmirnov> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS test needs samples".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KolmogorovSmirnov {
        statistic: d,
        p_value: ks_p(d, na * nb / (na + nb)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn uniform_samples(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn chi_square_accepts_the_true_distribution() {
        let xs = uniform_samples(50_000, 1);
        let mut h = Histogram::uniform(0.0, 1.0, 20).unwrap();
        h.extend(xs.iter().copied());
        let r = chi_square(&h, 0..20, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_eq!(r.dof, 19);
        assert!(r.p_value > 0.001, "{r:?}");
        let wrong = chi_square(&h, 0..20, |x| x.clamp(0.0, 1.0).powf(1.1)).unwrap();
        assert!(wrong.p_value < 1e-6);
    }

    #[test]
    fn chi_square_conditional_on_subrange() {
        let xs = uniform_samples(20_000, 2);
        let mut h = Histogram::uniform(0.0, 1.0, 10).unwrap();
        h.extend(xs.iter().copied());
        let r = chi_square(&h, 3..10, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_eq!(r.samples, h.counts()[3..].iter().sum::<u64>());
        assert!(r.p_value > 0.001);
    }

    #[test]
    fn sparse_bins_are_merged() {
        let mut h = Histogram::uniform(0.0, 1.0, 10).unwrap();
        h.extend(uniform_samples(30, 3));
        let r = chi_square(&h, 0..10, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.bins_used <= 6);
    }

    #[test]
    fn kolmogorov_survival_reference_values() {
        // Q(1.36) ~ 0.05 and Q(1.63) ~ 0.01 are the classic critical values.
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn ks_tests() {
        let xs = uniform_samples(5000, 4);
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 0.01);
        let skewed: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(ks_one_sample(&skewed, |x| x.clamp(0.0, 1.0)).unwrap().p_value < 1e-6);
        let ys = uniform_samples(4000, 5);
        assert!(ks_two_sample(&xs, &ys).unwrap().p_value > 0.01);
        assert!(ks_two_sample(&xs, &skewed).unwrap().p_value < 1e-6);
    }
}
