//! Eigenvalue statistics of density matrices and Hamiltonians.
//!
//! The per-spectrum pipeline is: truncate the negligible tail, keep the
//! central fraction, then take spacing ratios of the raw bulk and unfold it
//! for spacings and number variance. Eigenvalue densities use the truncated
//! spectrum. Everything aggregates into a mergeable [`SpectralStatistics`].

pub mod density;
pub mod histogram;
pub mod ratio;
pub mod unfold;

pub use density::{
    marchenko_pastur_cdf, marchenko_pastur_pdf, number_variance_asymptotic, quarter_circle_cdf,
    quarter_circle_pdf, rescale_eigenvalues, standardize_eigenvalues, wigner_surmise,
    wigner_surmise_cdf, DensityScaling, SymmetryClass,
};
pub use histogram::Histogram;
pub use ratio::{
    r_tilde_crossover, r_tilde_mean, r_tilde_values, RatioAccumulator, RTildeMean,
    R_TILDE_GOE, R_TILDE_GUE, R_TILDE_MIDPOINT, R_TILDE_POISSON,
};
pub use unfold::{number_variance, unfold, NumberVarianceAccumulator, UnfoldedSpectrum};

use crate::error::{Error, Result};

/// Eigenvalues of one realization at one time, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<f64>,
    pub time: f64,
    pub source: String,
    pub realization: u64,
}

impl SpectrumSample {
    pub fn new(mut eigenvalues: Vec<f64>, time: f64, source: impl Into<String>, realization: u64) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self {
            eigenvalues,
            time,
            source: source.into(),
            realization,
        }
    }
}

/// Outcome of [`truncate_spectrum`].
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    /// Kept eigenvalues, ascending.
    pub kept: Vec<f64>,
    /// Set when even the full spectrum sums to less than `1 - tolerance`.
    pub short_of_unit_trace: bool,
}

/// Keeps the largest eigenvalues until their sum reaches `1 - tolerance`,
/// discarding the numerically meaningless tail of a density matrix.
pub fn truncate_spectrum(eigs: &[f64], tolerance: f64) -> Truncation {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let target = 1.0 - tolerance;
    let mut sum = 0.0;
    let mut keep = sorted.len();
    for (k, &x) in sorted.iter().enumerate() {
        sum += x;
        if sum >= target {
            keep = k + 1;
            break;
        }
    }
    let short_of_unit_trace = sum < target;
    sorted.truncate(keep);
    sorted.reverse();
    Truncation {
        kept: sorted,
        short_of_unit_trace,
    }
}

/// Central `ceil(fraction * len)` values of an ascending slice. When the
/// trimmed count is odd, the extra value is taken from the lower end.
pub fn central_bulk(eigs: &[f64], fraction: f64) -> Result<&[f64]> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("bulk fraction must lie in (0, 1], got {fraction}")));
    }
    let n = eigs.len();
    let keep = ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let keep = keep.min(n);
    let trim = n - keep;
    let lower = trim - trim / 2;
    Ok(&eigs[lower..lower + keep])
}

/// Density histogram of spacings divided by their mean.
pub fn spacing_histogram(eigs: &[f64], bins: usize, s_max: f64) -> Result<Histogram> {
    if eigs.len() < 2 {
        return Err(Error::Domain("spacings need at least 2 eigenvalues".into()));
    }
    let spacings: Vec<f64> = eigs.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let mut h = Histogram::uniform(0.0, s_max, bins)?;
    h.extend(spacings.iter().map(|d| d / mean));
    Ok(h)
}

/// Knobs of the per-spectrum pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSettings {
    pub bulk_fraction: f64,
    pub truncation_tolerance: f64,
    pub unfolding_degree: usize,
    pub spacing_bins: usize,
    pub spacing_max: f64,
    pub sigma2_lengths: Vec<f64>,
    /// Truncate before analysis; Hamiltonian spectra skip it.
    pub truncate: bool,
    /// Fill the eigenvalue-density histograms.
    pub densities: bool,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        Self {
            bulk_fraction: 0.6,
            truncation_tolerance: 1e-12,
            unfolding_degree: 7,
            spacing_bins: 50,
            spacing_max: 5.0,
            sigma2_lengths: vec![0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0],
            truncate: true,
            densities: true,
        }
    }
}

/// Edges for eigenvalue densities on the Marchenko–Pastur scale: one bin
/// `[0, 0.05)` for the singular edge, then 40 equal bins up to 4, then an
/// open tail bin to 6.
pub fn lambda_edges() -> Vec<f64> {
    let mut e = vec![0.0];
    e.extend((0..=40).map(|k| 0.05 + (4.0 - 0.05) * k as f64 / 40.0));
    e.push(6.0);
    e
}

/// Index range of the 40 bins on `[0.05, 4]` in [`lambda_edges`].
pub const LAMBDA_TEST_BINS: std::ops::Range<usize> = 1..41;

/// Edges in `y = sqrt(lambda)` matching [`lambda_edges`].
pub fn sqrt_lambda_edges() -> Vec<f64> {
    lambda_edges().iter().map(|x| x.sqrt()).collect()
}

/// Density histograms for one scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityHistograms {
    pub lambda: Histogram,
    pub sqrt_lambda: Histogram,
}

impl DensityHistograms {
    fn new() -> Self {
        Self {
            lambda: Histogram::new(lambda_edges()).expect("valid edges"),
            sqrt_lambda: Histogram::new(sqrt_lambda_edges()).expect("valid edges"),
        }
    }

    fn push(&mut self, scaled: &[f64]) {
        for &x in scaled {
            self.lambda.push(x);
            self.sqrt_lambda.push(x.max(0.0).sqrt());
        }
    }

    fn merge(&mut self, other: &Self) -> Result<()> {
        self.lambda.merge(&other.lambda)?;
        self.sqrt_lambda.merge(&other.sqrt_lambda)
    }
}

/// Aggregated statistics of many spectra at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralStatistics {
    pub settings: SpectralSettings,
    pub ratio: RatioAccumulator,
    pub spacing: Histogram,
    pub number_variance: NumberVarianceAccumulator,
    /// `lambda * N` scaling.
    pub density_trace: DensityHistograms,
    /// Standardized scaling (largest eigenvalue dropped, unit spread).
    pub density_standardized: DensityHistograms,
    pub spectra: u64,
    /// Sum over spectra of the retained (truncated) level count.
    pub retained_levels: u64,
    /// Sum of bulk sizes.
    pub bulk_levels: u64,
    /// Spectra whose eigenvalues never reached `1 - tolerance`.
    pub short_trace: u64,
    pub unfolding_failures: u64,
    /// Sum and square sum of the unfolded mean spacing per spectrum.
    pub unfolded_spacing_sum: f64,
    pub unfolded_spacing_sq: f64,
    pub unfolded_spectra: u64,
}

impl SpectralStatistics {
    pub fn new(settings: SpectralSettings) -> Result<Self> {
        Ok(Self {
            spacing: Histogram::uniform(0.0, settings.spacing_max, settings.spacing_bins)?,
            number_variance: NumberVarianceAccumulator::new(settings.sigma2_lengths.clone())?,
            settings,
            ratio: RatioAccumulator::default(),
            density_trace: DensityHistograms::new(),
            density_standardized: DensityHistograms::new(),
            spectra: 0,
            retained_levels: 0,
            bulk_levels: 0,
            short_trace: 0,
            unfolding_failures: 0,
            unfolded_spacing_sum: 0.0,
            unfolded_spacing_sq: 0.0,
            unfolded_spectra: 0,
        })
    }

    /// Runs the pipeline on one spectrum of Hilbert dimension `dim`.
    pub fn push(&mut self, sample: &SpectrumSample, dim: usize) -> Result<()> {
        let s = &self.settings;
        let truncation = if s.truncate {
            truncate_spectrum(&sample.eigenvalues, s.truncation_tolerance)
        } else {
            Truncation {
                kept: sample.eigenvalues.clone(),
                short_of_unit_trace: false,
            }
        };
        let kept = &truncation.kept;
        self.spectra += 1;
        self.retained_levels += kept.len() as u64;
        self.short_trace += truncation.short_of_unit_trace as u64;

        if s.densities {
            self.density_trace.push(&rescale_eigenvalues(kept, dim));
            if kept.len() >= 3 {
                self.density_standardized.push(&standardize_eigenvalues(kept)?);
            }
        }

        let bulk = central_bulk(kept, s.bulk_fraction)?;
        self.bulk_levels += bulk.len() as u64;
        if bulk.len() >= 3 {
            self.ratio.push_spectrum(bulk)?;
        }
        match unfold(bulk, s.unfolding_degree) {
            Ok(u) => {
                let m = u.mean_spacing();
                self.unfolded_spacing_sum += m;
                self.unfolded_spacing_sq += m * m;
                self.unfolded_spectra += 1;
                self.spacing.extend(u.normalized_spacings());
                self.number_variance.push(&u);
            }
            Err(Error::Unfolding(_)) => self.unfolding_failures += 1,
            Err(e) => return Err(e),
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.settings != other.settings {
            return Err(Error::Shape("statistics were collected with different settings".into()));
        }
        self.ratio.merge(&other.ratio);
        self.spacing.merge(&other.spacing)?;
        self.number_variance.merge(&other.number_variance)?;
        self.density_trace.merge(&other.density_trace)?;
        self.density_standardized.merge(&other.density_standardized)?;
        self.spectra += other.spectra;
        self.retained_levels += other.retained_levels;
        self.bulk_levels += other.bulk_levels;
        self.short_trace += other.short_trace;
        self.unfolding_failures += other.unfolding_failures;
        self.unfolded_spacing_sum += other.unfolded_spacing_sum;
        self.unfolded_spacing_sq += other.unfolded_spacing_sq;
        self.unfolded_spectra += other.unfolded_spectra;
        Ok(())
    }

    pub fn density(&self, scaling: DensityScaling) -> &DensityHistograms {
        match scaling {
            DensityScaling::TraceN => &self.density_trace,
            DensityScaling::Standardized => &self.density_standardized,
        }
    }

    /// Mean over spectra of the unfolded mean spacing.
    pub fn mean_unfolded_spacing(&self) -> f64 {
        self.unfolded_spacing_sum / self.unfolded_spectra as f64
    }
}
