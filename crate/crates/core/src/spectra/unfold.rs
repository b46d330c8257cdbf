//! Polynomial unfolding and the level number variance.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;

use super::density::{number_variance_asymptotic, SymmetryClass};
use crate::error::{Error, Result};

/// Largest accepted ratio between extreme diagonal entries of the QR factor.
pub const MAX_CONDITION: f64 = 1e12;

/// Levels mapped so their mean spacing is one.
#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldedSpectrum {
    levels: Vec<f64>,
    degree: usize,
    /// Root-mean-square deviation of the fit from the staircase.
    residual: f64,
}

impl UnfoldedSpectrum {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn mean_spacing(&self) -> f64 {
        let n = self.levels.len();
        (self.levels[n - 1] - self.levels[0]) / (n - 1) as f64
    }

    pub fn span(&self) -> f64 {
        self.levels[self.levels.len() - 1] - self.levels[0]
    }

    /// Nearest-neighbour spacings divided by their mean.
    pub fn normalized_spacings(&self) -> Vec<f64> {
        let mean = self.mean_spacing();
        self.levels.windows(2).map(|w| (w[1] - w[0]) / mean).collect()
    }
}

fn chebyshev_row(x: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree >= 1 {
        out[1] = x;
    }
    for k in 2..=degree {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

/// Least-squares fit of a degree-`degree` polynomial to the staircase
/// `(lambda_i, i + 1/2)`; the unfolded levels are the fit evaluated at the
/// eigenvalues. The fit uses Chebyshev polynomials on the spectrum mapped
/// to `[-1, 1]`, solved by QR.
pub fn unfold(eigs: &[f64], degree: usize) -> Result<UnfoldedSpectrum> {
    let n = eigs.len();
    if n < degree + 2 {
        return Err(Error::Unfolding(format!(
            "{n} levels cannot support a degree-{degree} fit (need at least {})",
            degree + 2
        )));
    }
    if eigs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("eigenvalues must be ascending".into()));
    }
    let (lo, hi) = (eigs[0], eigs[n - 1]);
    if !(hi > lo) {
        return Err(Error::Unfolding("spectrum has zero width; rescale or drop degenerate levels".into()));
    }
    let map = |x: f64| (2.0 * x - lo - hi) / (hi - lo);

    let cols = degree + 1;
    let mut a = Mat::<f64>::zeros(n, cols);
    let mut row = vec![0.0; cols];
    for (i, &x) in eigs.iter().enumerate() {
        chebyshev_row(map(x), degree, &mut row);
        for (k, &v) in row.iter().enumerate() {
            a[(i, k)] = v;
        }
    }
    let b = Mat::<f64>::from_fn(n, 1, |i, _| i as f64 + 0.5);
    let qr = a.qr();
    let r = qr.R();
    let diag: Vec<f64> = (0..cols).map(|k| r[(k, k)].abs()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(dmin > 0.0) || dmax / dmin > MAX_CONDITION {
        return Err(Error::Unfolding(format!(
            "least-squares system is ill-conditioned (estimate {:.2e}); rescale the spectrum or lower the degree",
            dmax / dmin
        )));
    }
    let coef = qr.solve_lstsq(&b);

    let mut levels = Vec::with_capacity(n);
    let mut ss = 0.0;
    for (i, &x) in eigs.iter().enumerate() {
        chebyshev_row(map(x), degree, &mut row);
        let v: f64 = row.iter().enumerate().map(|(k, t)| t * coef[(k, 0)]).sum();
        ss += (v - (i as f64 + 0.5)).powi(2);
        levels.push(v);
    }
    Ok(UnfoldedSpectrum {
        levels,
        degree,
        residual: (ss / n as f64).sqrt(),
    })
}

/// Pooled window counts for `Sigma^2(l)`.
///
/// Windows `[x, x + l)` start on the grid `x = x_0 + k l/4` while
/// `x + l <= x_last`. Counts and squared counts are summed over all windows
/// of all spectra; `Sigma^2 = <n^2> - <n>^2` of the pooled counts. Lengths
/// longer than a quarter of a spectrum's span are skipped for that spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct NumberVarianceAccumulator {
    lengths: Vec<f64>,
    windows: Vec<u64>,
    sum_n: Vec<u64>,
    sum_n2: Vec<u64>,
    excluded: Vec<u64>,
}

/// Start-grid oversampling: windows begin every `l / 4`.
pub const WINDOW_OVERSAMPLING: f64 = 4.0;

impl NumberVarianceAccumulator {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("window lengths must be positive".into()));
        }
        let k = lengths.len();
        Ok(Self {
            lengths,
            windows: vec![0; k],
            sum_n: vec![0; k],
            sum_n2: vec![0; k],
            excluded: vec![0; k],
        })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn push(&mut self, unfolded: &UnfoldedSpectrum) {
        let levels = unfolded.levels();
        let span = unfolded.span();
        let (first, last) = (levels[0], levels[levels.len() - 1]);
        for (k, &l) in self.lengths.iter().enumerate() {
            if l > span / 4.0 {
                self.excluded[k] += 1;
                continue;
            }
            let step = l / WINDOW_OVERSAMPLING;
            let mut j = 0u64;
            loop {
                let x = first + step * j as f64;
                if x + l > last {
                    break;
                }
                let a = levels.partition_point(|&v| v < x);
                let b = levels.partition_point(|&v| v < x + l);
                let c = (b - a) as u64;
                self.windows[k] += 1;
                self.sum_n[k] += c;
                self.sum_n2[k] += c * c;
                j += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.lengths != other.lengths {
            return Err(Error::Shape("number-variance accumulators use different lengths".into()));
        }
        for k in 0..self.lengths.len() {
            self.windows[k] += other.windows[k];
            self.sum_n[k] += other.sum_n[k];
            self.sum_n2[k] += other.sum_n2[k];
            self.excluded[k] += other.excluded[k];
        }
        Ok(())
    }

    pub fn windows(&self) -> &[u64] {
        &self.windows
    }

    pub fn sum_n(&self) -> &[u64] {
        &self.sum_n
    }

    pub fn sum_n2(&self) -> &[u64] {
        &self.sum_n2
    }

    /// Spectra skipped per length because the window was too long.
    pub fn excluded(&self) -> &[u64] {
        &self.excluded
    }

    pub(crate) fn from_parts(
        lengths: Vec<f64>,
        windows: Vec<u64>,
        sum_n: Vec<u64>,
        sum_n2: Vec<u64>,
        excluded: Vec<u64>,
    ) -> Result<Self> {
        let k = lengths.len();
        if [windows.len(), sum_n.len(), sum_n2.len(), excluded.len()].iter().any(|&x| x != k) {
            return Err(Error::Shape("number-variance columns differ in length".into()));
        }
        Ok(Self {
            lengths,
            windows,
            sum_n,
            sum_n2,
            excluded,
        })
    }

    /// `(l, Sigma^2(l))`; `None` where no window was counted.
    pub fn table(&self) -> Vec<(f64, Option<f64>)> {
        self.lengths
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let w = self.windows[k];
                let v = (w > 0).then(|| {
                    let wf = w as f64;
                    let m = self.sum_n[k] as f64 / wf;
                    (self.sum_n2[k] as f64 / wf - m * m).max(0.0)
                });
                (l, v)
            })
            .collect()
    }
}

/// `Sigma^2(l)` of a single unfolded spectrum.
pub fn number_variance(unfolded: &UnfoldedSpectrum, lengths: &[f64]) -> Result<Vec<(f64, Option<f64>)>> {
    let mut acc = NumberVarianceAccumulator::new(lengths.to_vec())?;
    acc.push(unfolded);
    Ok(acc.table())
}

/// Asymptotic `Sigma^2` of the given class, for overlay columns.
pub fn number_variance_reference(l: f64, class: SymmetryClass) -> f64 {
    number_variance_asymptotic(l, class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof::ks_one_sample;
    use rand::{Rng, SeedableRng};

    #[test]
    fn uniform_levels_degree_one() {
        let eigs: Vec<f64> = (1..=100).map(f64::from).collect();
        let u = unfold(&eigs, 1).unwrap();
        assert!((u.mean_spacing() - 1.0).abs() < 1e-10);
        for (i, v) in u.levels().iter().enumerate() {
            assert!((v - (i as f64 + 0.5)).abs() < 1e-9);
        }
    }

    #[test]
    fn semicircle_becomes_flat() {
        // quantiles of the semicircle on [-2, 2]
        let n = 2000;
        let cdf = |x: f64| 0.5 + (x * (4.0 - x * x).sqrt() / 4.0 + (x / 2.0).asin()) / std::f64::consts::PI;
        let inv = |p: f64| {
            let (mut a, mut b) = (-2.0, 2.0);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if cdf(m) < p {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut eigs: Vec<f64> = (0..n).map(|_| inv(rng.random::<f64>())).collect();
        eigs.sort_by(f64::total_cmp);
        // central 60%, where a degree-7 polynomial describes the staircase
        let bulk = &eigs[400..1600];
        let u = unfold(bulk, 7).unwrap();
        assert!((u.mean_spacing() - 1.0).abs() < 0.02);
        let (lo, hi) = (u.levels()[0], u.levels()[u.levels().len() - 1]);
        let ks = ks_one_sample(u.levels(), |x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)).unwrap();
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    #[test]
    fn unfolding_errors() {
        assert!(matches!(unfold(&[1.0, 2.0, 3.0], 7), Err(Error::Unfolding(_))));
        assert!(matches!(unfold(&[1.0; 20], 3), Err(Error::Unfolding(_))));
    }

    #[test]
    fn poisson_number_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut acc = NumberVarianceAccumulator::new(vec![1.0, 2.0, 5.0, 10.0]).unwrap();
        for _ in 0..50 {
            let mut x: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() * 2000.0).collect();
            x.sort_by(f64::total_cmp);
            let u = unfold(&x, 1).unwrap();
            acc.push(&u);
        }
        for (l, v) in acc.table() {
            let v = v.unwrap();
            assert!((v - l).abs() < 0.1 * l, "l={l}: {v}");
        }
    }

    #[test]
    fn picket_fence_is_rigid() {
        let eigs: Vec<f64> = (0..500).map(f64::from).collect();
        let u = unfold(&eigs, 1).unwrap();
        for (_, v) in number_variance(&u, &[0.5, 1.0, 2.3, 7.7, 10.0]).unwrap() {
            assert!(v.unwrap() <= 0.26);
        }
    }

    #[test]
    fn long_windows_are_excluded() {
        let eigs: Vec<f64> = (0..40).map(f64::from).collect();
        let u = unfold(&eigs, 1).unwrap();
        let mut acc = NumberVarianceAccumulator::new(vec![5.0, 20.0]).unwrap();
        acc.push(&u);
        assert_eq!(acc.excluded(), &[0, 1]);
        assert!(acc.table()[1].1.is_none());
    }
}
