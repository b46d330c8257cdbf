//! Third-order short-time expansion of the mixed state.
//!
//! For a single real Hamiltonian and `rho0 = |0><0|`,
//! `rho(t) = sigma0 + sigma1 t + sigma2 t^2 + sigma3 t^3 + O(t^4)` with
//!
//! ```text
//! sigma1 = i[rho0, H]
//! sigma2 = H rho0 H - {H^2, rho0}/2
//! sigma3 = (i/2)[H rho0 H, H] + (i/6)[H^3, rho0]
//! ```
//!
//! Averaging over the ensemble, the block with row and column indices
//! `n, m >= 1` becomes `(t^2/2) 1 + t^2/sqrt(2N) (B - i t sqrt(N)/2 D)`,
//! where `B` is real symmetric and `D` real antisymmetric. The conventional
//! split `sigma~ + sigma` (with `+i` in front of `D`) is the transpose of
//! that block; transposition leaves the spectrum unchanged.

use faer::Mat;
use num_complex::Complex64;

use crate::ensembles::{gaussian, RealAntisymmetricMatrix, RealSymmetricMatrix};
use crate::rng::RngStream;
use crate::error::{Error, Result};
use crate::evolution::{self, DensityMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The four expansion terms for one Hamiltonian.
#[derive(Clone, Debug)]
pub struct SeriesTerms {
    pub sigma0: Mat<Complex64>,
    pub sigma1: Mat<Complex64>,
    pub sigma2: Mat<Complex64>,
    pub sigma3: Mat<Complex64>,
}

impl SeriesTerms {
    pub fn terms(&self) -> [&Mat<Complex64>; 4] {
        [&self.sigma0, &self.sigma1, &self.sigma2, &self.sigma3]
    }
}

fn complexify(h: &RealSymmetricMatrix) -> Mat<Complex64> {
    let n = h.dim();
    Mat::from_fn(n, n, |i, j| Complex64::new(h.get(i, j), 0.0))
}

fn commutator(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Mat<Complex64> {
    a * b - b * a
}

fn scaled(m: Mat<Complex64>, z: Complex64) -> Mat<Complex64> {
    let (r, c) = (m.nrows(), m.ncols());
    Mat::from_fn(r, c, |i, j| m[(i, j)] * z)
}

/// Expansion terms by direct matrix products. `rho0` must be a basis
/// projector `|k><k|`.
pub fn series_terms(h: &RealSymmetricMatrix, rho0: &DensityMatrix) -> Result<SeriesTerms> {
    if rho0.dim() != h.dim() {
        return Err(Error::Shape(format!(
            "rho0 has dimension {} but H has {}",
            rho0.dim(),
            h.dim()
        )));
    }
    if rho0.basis_projector_index().is_none() {
        return Err(Error::Precondition(
            "the series requires rho0 to be a basis-state projector".into(),
        ));
    }
    let rho = rho0.entries().to_owned();
    let hc = complexify(h);
    let h2 = &hc * &hc;
    let h3 = &h2 * &hc;
    let hrh = &(&hc * &rho) * &hc;

    let sigma1 = scaled(commutator(&rho, &hc), I);
    let anti = &h2 * &rho + &rho * &h2;
    let sigma2 = &hrh - scaled(anti, Complex64::new(0.5, 0.0));
    let sigma3 = scaled(commutator(&hrh, &hc), I * 0.5) + scaled(commutator(&h3, &rho), I / 6.0);
    Ok(SeriesTerms {
        sigma0: rho,
        sigma1,
        sigma2,
        sigma3,
    })
}

/// `(1/N) sum_l sum_{k<=3} sigma_{l,k} t^k`, Hermitized. Trace is one at
/// every order; positivity holds only up to the `O(t^4)` remainder, so the
/// result is not checked for it.
pub fn series_density(
    ensemble: &[RealSymmetricMatrix],
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if ensemble.is_empty() {
        return Err(Error::Config("empty Hamiltonian ensemble".into()));
    }
    let n = rho0.dim();
    let mut acc = Mat::<Complex64>::zeros(n, n);
    for h in ensemble {
        let s = series_terms(h, rho0)?;
        let mut power = 1.0;
        for term in s.terms() {
            for j in 0..n {
                for i in 0..n {
                    acc[(i, j)] += term[(i, j)] * power;
                }
            }
            power *= t;
        }
    }
    let k = ensemble.len() as f64;
    let entries = Mat::from_fn(n, n, |i, j| (acc[(i, j)] + acc[(j, i)].conj()) * (0.5 / k));
    Ok(DensityMatrix::from_entries_unchecked(entries, t))
}

/// `B` and `D` on the block `n, m >= 1`, indexed from zero.
#[derive(Clone, Debug)]
pub struct CrossoverMatrices {
    pub b: RealSymmetricMatrix,
    pub d: RealAntisymmetricMatrix,
    /// Set when the sampled diagonal variance is far from one.
    pub normalization_warning: Option<String>,
}

impl CrossoverMatrices {
    /// Hilbert dimension `N`; the matrices are `(N-1) x (N-1)`.
    pub fn hilbert_dim(&self) -> usize {
        self.b.dim() + 1
    }
}

/// ```text
/// B_nm = sqrt(2/N) sum_l H_{l;n0} H_{l;0m} - delta_nm sqrt(N/2)
/// D_nm = (sqrt 2 / N) sum_l [(H_l^2)_{n0} H_{l;0m} - H_{l;n0} (H_l^2)_{0m}]
/// ```
///
/// The `sqrt(N/2)` offset is the mean of the first sum and sits on the
/// diagonal only; off the diagonal the sum already has zero mean.
pub fn build_crossover_matrices(ensemble: &[RealSymmetricMatrix]) -> Result<CrossoverMatrices> {
    let n = ensemble.first().map(RealSymmetricMatrix::dim).unwrap_or(0);
    let mut builder = CrossoverBuilder::new(n)?;
    for h in ensemble {
        builder.push(h)?;
    }
    builder.finish()
}

/// Accumulates `B` and `D` one Hamiltonian at a time. Only `h = H e0` and
/// `u = H h` of each member are kept.
#[derive(Clone, Debug)]
pub struct CrossoverBuilder {
    n: usize,
    hs: Mat<f64>,
    us: Mat<f64>,
    members: usize,
    diag_sq: f64,
}

impl CrossoverBuilder {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension {
                dim: n,
                reason: "crossover matrices need N >= 2",
            });
        }
        Ok(Self {
            n,
            hs: Mat::zeros(n - 1, n),
            us: Mat::zeros(n - 1, n),
            members: 0,
            diag_sq: 0.0,
        })
    }

    fn slot(&mut self) -> Result<usize> {
        if self.members == self.n {
            return Err(Error::Config(format!(
                "ensemble already holds {} members, the dimension",
                self.n
            )));
        }
        self.members += 1;
        Ok(self.members - 1)
    }

    pub fn push(&mut self, h: &RealSymmetricMatrix) -> Result<()> {
        let n = self.n;
        if h.dim() != n {
            return Err(Error::Shape(format!("member of dimension {} in a dimension-{n} ensemble", h.dim())));
        }
        let l = self.slot()?;
        let m = h.as_ref();
        let h0 = m.col(0);
        let mut u = vec![0.0; n];
        for k in 0..n {
            let hk0 = h0[k];
            let col = m.col(k);
            for (r, ur) in u.iter_mut().enumerate() {
                *ur += col[r] * hk0;
            }
        }
        for r in 1..n {
            self.hs[(r - 1, l)] = h0[r];
            self.us[(r - 1, l)] = u[r];
        }
        self.diag_sq += (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum::<f64>();
        Ok(())
    }

    /// Draws a GOE member from `stream` without storing it. The draws are
    /// identical to [`crate::ensembles::sample_goe`] on the same stream.
    pub fn push_goe(&mut self, stream: &RngStream) -> Result<()> {
        let n = self.n;
        let l = self.slot()?;
        let mut rng = stream.rng();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut h0 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for (i, x) in h0.iter_mut().enumerate() {
            let g = gaussian(&mut rng);
            *x = if i == 0 { g } else { g * s };
        }
        self.diag_sq += h0[0] * h0[0];
        for i in 0..n {
            u[i] += h0[i] * h0[0];
        }
        for &hr0 in h0.iter().skip(1) {
            u[0] += hr0 * hr0;
        }
        for j in 1..n {
            let hj = h0[j];
            let mut uj = 0.0;
            let d = gaussian(&mut rng);
            self.diag_sq += d * d;
            uj += d * hj;
            for i in (j + 1)..n {
                let x = gaussian(&mut rng) * s;
                uj += x * h0[i];
                u[i] += x * hj;
            }
            u[j] += uj;
        }
        for r in 1..n {
            self.hs[(r - 1, l)] = h0[r];
            self.us[(r - 1, l)] = u[r];
        }
        Ok(())
    }

    pub fn finish(self) -> Result<CrossoverMatrices> {
        let (n, members) = (self.n, self.members);
        if members != n {
            return Err(Error::Config(format!(
                "ensemble has {members} members but the dimension is {n}"
            )));
        }
        let nf = n as f64;
        let hh = &self.hs * self.hs.transpose();
        let uh = &self.us * self.hs.transpose();
        let cb = (2.0 / nf).sqrt();
        let offset = (nf / 2.0).sqrt();
        let b = RealSymmetricMatrix::from_lower(n - 1, |i, j| {
            let v = cb * hh[(i, j)];
            if i == j {
                v - offset
            } else {
                v
            }
        });
        let cd = 2f64.sqrt() / nf;
        let d = RealAntisymmetricMatrix::from_lower(n - 1, |i, j| cd * (uh[(i, j)] - uh[(j, i)]));

        let samples = (members * n) as f64;
        let diag_var = self.diag_sq / samples;
        let slack = 0.25f64.max(6.0 * (2.0 / samples).sqrt());
        let normalization_warning = ((diag_var - 1.0).abs() > slack).then(|| {
            format!("mean squared diagonal element is {diag_var:.4}; the expansion assumes unit variance")
        });
        Ok(CrossoverMatrices {
            b,
            d,
            normalization_warning,
        })
    }
}

/// `t^2/sqrt(2N) (B + i t sqrt(N)/2 D)`.
pub fn sigma_bulk(cm: &CrossoverMatrices, t: f64, n: usize) -> Mat<Complex64> {
    let nf = n as f64;
    let pre = t * t / (2.0 * nf).sqrt();
    let im = t * nf.sqrt() / 2.0;
    let k = cm.b.dim();
    Mat::from_fn(k, k, |i, j| Complex64::new(pre * cm.b.get(i, j), pre * im * cm.d.get(i, j)))
}

/// First row and column part of the split, for a single ensemble:
/// `|0><0| + sum_n (a_n |0><n| + a_n^* |n><0|) + (t^2/2) 1` with
/// `a_n = (1/N) sum_l (-i H t - H^2 t^2/2 + i H^3 t^3/6)_{n0}`.
pub fn sigma_tilde(ensemble: &[RealSymmetricMatrix], t: f64) -> Result<Mat<Complex64>> {
    let n = ensemble.first().map(RealSymmetricMatrix::dim).unwrap_or(0);
    if n == 0 || ensemble.iter().any(|h| h.dim() != n) {
        return Err(Error::Shape("ensemble must be nonempty with equal dimensions".into()));
    }
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    for h in ensemble {
        let m = h.as_ref();
        let h1: Vec<f64> = (0..n).map(|r| m[(r, 0)]).collect();
        let h2: Vec<f64> = (0..n).map(|r| (0..n).map(|k| m[(r, k)] * h1[k]).sum()).collect();
        let h3: Vec<f64> = (0..n).map(|r| (0..n).map(|k| m[(r, k)] * h2[k]).sum()).collect();
        for r in 0..n {
            a[r] += Complex64::new(-0.5 * h2[r] * t * t, -h1[r] * t + h3[r] * t.powi(3) / 6.0);
        }
    }
    let k = ensemble.len() as f64;
    let half_t2 = Complex64::new(t * t / 2.0, 0.0);
    Ok(Mat::from_fn(n, n, |i, j| {
        let mut z = if i == j { half_t2 } else { Complex64::new(0.0, 0.0) };
        if i == 0 && j == 0 {
            z += 1.0;
        } else if i == 0 {
            z += a[j] / k;
        } else if j == 0 {
            z += (a[i] / k).conj();
        }
        z
    }))
}

/// `2/N`, the order-of-magnitude time at which GUE statistics set in.
pub fn crossover_time(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension {
            dim: n,
            reason: "crossover time needs N >= 2",
        });
    }
    Ok(2.0 / n as f64)
}

/// Pooled sample moments of one class of matrix elements.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.count += 1;
        self.s1 += x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.s1 / self.count as f64
    }

    /// Standard error of the mean.
    pub fn mean_stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        let m = self.mean();
        (self.s2 - n * m * m) / (n - 1.0)
    }

    /// Standard error of [`Self::variance`] from the fourth central moment,
    /// treating the pooled elements as independent.
    pub fn variance_stderr(&self) -> f64 {
        let n = self.count as f64;
        let m = self.mean();
        let (e2, e3, e4) = (self.s2 / n, self.s3 / n, self.s4 / n);
        let mu2 = e2 - m * m;
        let mu4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m.powi(4);
        ((mu4 - mu2 * mu2) / n).max(0.0).sqrt()
    }
}

/// Element statistics of `B` and `D` pooled over independent ensembles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrossoverMoments {
    pub b_diagonal: MomentAccumulator,
    pub b_off_diagonal: MomentAccumulator,
    pub d_off_diagonal: MomentAccumulator,
    /// Variance of `D_nm` computed separately for every ensemble; the spread
    /// of these captures correlations between elements of one ensemble.
    pub d_per_ensemble: MomentAccumulator,
    pub ensembles: u64,
}

impl CrossoverMoments {
    /// Adds one ensemble; off-diagonal elements use the strict upper
    /// triangle so each independent entry counts once.
    pub fn push(&mut self, cm: &CrossoverMatrices) {
        let k = cm.b.dim();
        let mut d_here = MomentAccumulator::default();
        for j in 0..k {
            self.b_diagonal.push(cm.b.get(j, j));
            for i in 0..j {
                self.b_off_diagonal.push(cm.b.get(i, j));
                let d = cm.d.get(i, j);
                self.d_off_diagonal.push(d);
                d_here.push(d);
            }
        }
        self.d_per_ensemble.push(d_here.s2 / d_here.count as f64);
        self.ensembles += 1;
    }
}

/// One variance compared against its target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
}

impl VarianceCheck {
    pub fn z_score(&self) -> f64 {
        (self.estimate - self.target) / self.stderr
    }

    pub fn within(&self, standard_errors: f64) -> bool {
        self.z_score().abs() <= standard_errors
    }
}

/// Outcome of the short-time consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortTimeReport {
    pub dimension: usize,
    pub ensembles: u64,
    pub b_diagonal: VarianceCheck,
    pub b_off_diagonal: VarianceCheck,
    pub d_off_diagonal: VarianceCheck,
    /// Mean of `B` off the diagonal with its standard error.
    pub b_mean: (f64, f64),
    /// `(N + 1) / (2N)`, the exact finite-`N` variance of `D_nm`.
    pub d_exact_variance: f64,
    /// Per-ensemble estimate of `D` variance: mean over ensembles and its
    /// standard error.
    pub d_block_estimate: (f64, f64),
    pub order: OrderCheck,
}

/// Log-log slope of the truncation error against `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderCheck {
    pub dimension: usize,
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
}

/// `||rho_series(t) - rho_exact(t)||_F` for `rho0 = |0><0|`.
pub fn truncation_error(ensemble: &[RealSymmetricMatrix], t: f64) -> Result<f64> {
    let n = ensemble.first().map(RealSymmetricMatrix::dim).unwrap_or(0);
    let psi0 = crate::ensembles::basis_state(n, 0)?;
    let rho0 = DensityMatrix::pure(&psi0, 0.0);
    let series = series_density(ensemble, &rho0, t)?;
    let decomps = ensemble
        .iter()
        .map(evolution::decompose_real)
        .collect::<Result<Vec<_>>>()?;
    let opts = evolution::MixingOptions { allow_size_mismatch: true };
    let exact = evolution::mixed_state_with(&decomps, &psi0, t, opts)?;
    let (a, b) = (series.entries(), exact.entries());
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            sum += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    Ok(sum.sqrt())
}

/// Least-squares slope of `ln err` against `ln t` on `points` logarithmic
/// times spanning `[1e-3, 1e-2] * 2/sqrt(N)`.
pub fn order_check(ensemble: &[RealSymmetricMatrix], points: usize) -> Result<OrderCheck> {
    let n = ensemble.first().map(RealSymmetricMatrix::dim).unwrap_or(0);
    if points < 2 {
        return Err(Error::Config("order check needs at least two times".into()));
    }
    let scale = 2.0 / (n as f64).sqrt();
    let times: Vec<f64> = (0..points)
        .map(|k| scale * 10f64.powf(-3.0 + k as f64 / (points - 1) as f64))
        .collect();
    let errors = times
        .iter()
        .map(|&t| truncation_error(ensemble, t))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let slope = linear_slope(&xs, &ys);
    Ok(OrderCheck {
        dimension: n,
        times,
        errors,
        slope,
    })
}

fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Settings for [`short_time_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShortTimeSettings {
    pub dimension: usize,
    pub ensembles: u64,
    pub seed: u64,
    /// Dimension used for the truncation-order fit.
    pub order_dimension: usize,
    pub order_points: usize,
}

impl ShortTimeSettings {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            ensembles: 200,
            seed: 2024,
            order_dimension: 32,
            order_points: 9,
        }
    }
}

/// Samples `ensembles` independent GOE ensembles, pools the `B`/`D` element
/// moments and fits the truncation order.
pub fn short_time_check(settings: &ShortTimeSettings) -> Result<ShortTimeReport> {
    use crate::ensembles::sample_goe;
    use crate::rng::lane;
    use rayon::prelude::*;

    let n = settings.dimension;
    crossover_time(n)?;
    let per_ensemble = (0..settings.ensembles)
        .into_par_iter()
        .map(|m| {
            let mut builder = CrossoverBuilder::new(n)?;
            for l in 0..n as u64 {
                builder.push_goe(&RngStream::for_member(settings.seed, m, l, lane::HAMILTONIAN))?;
            }
            let cm = builder.finish()?;
            let mut moments = CrossoverMoments::default();
            moments.push(&cm);
            Ok(moments)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = CrossoverMoments::default();
    for part in &per_ensemble {
        total.b_diagonal.merge(&part.b_diagonal);
        total.b_off_diagonal.merge(&part.b_off_diagonal);
        total.d_off_diagonal.merge(&part.d_off_diagonal);
        total.d_per_ensemble.merge(&part.d_per_ensemble);
        total.ensembles += part.ensembles;
    }

    let check = |acc: &MomentAccumulator, target: f64| VarianceCheck {
        estimate: acc.variance(),
        stderr: acc.variance_stderr(),
        target,
    };
    let order_n = settings.order_dimension;
    let order_ensemble = (0..order_n as u64)
        .map(|l| sample_goe(order_n, &RngStream::for_member(settings.seed, u64::MAX, l, lane::HAMILTONIAN)))
        .collect::<Result<Vec<_>>>()?;
    let order = order_check(&order_ensemble, settings.order_points)?;
    let nf = n as f64;
    Ok(ShortTimeReport {
        dimension: n,
        ensembles: total.ensembles,
        b_diagonal: check(&total.b_diagonal, 1.0),
        b_off_diagonal: check(&total.b_off_diagonal, 0.5),
        d_off_diagonal: check(&total.d_off_diagonal, 0.5),
        b_mean: (total.b_off_diagonal.mean(), total.b_off_diagonal.mean_stderr()),
        d_exact_variance: (nf + 1.0) / (2.0 * nf),
        d_block_estimate: (total.d_per_ensemble.mean(), total.d_per_ensemble.mean_stderr()),
        order,
    })
}
