//! Experiment configuration: a TOML document with one table per concern.
//!
//! ```toml
//! [experiment]
//! kind = "goe-mix"          # goe-mix | gue-mix | crossover-hamiltonian
//!                           # | spin-hf | spin-oe | short-time-check
//! seed = 2024
//! realizations = 660        # M
//! workers = 4               # optional; RMTMIX_WORKERS overrides
//!
//! [system]
//! dimension = 256           # N for matrix ensembles and short-time-check
//! # chain_length = 10       # L for spin-hf / spin-oe
//! # disorder = 0.5          # h for spin kinds
//! # alpha = 0.2             # crossover-hamiltonian only
//!
//! [initial_state]
//! kind = "basis"            # basis | random-real
//! index = 0
//!
//! [time_grid]
//! spacing = "log"           # log | linear
//! unit = "nt"               # nt (N t) | t
//! start = 0.01
//! stop = 10.0
//! count = 19
//! # values = [0.01, 1.0, 10.0]   # explicit grid in `unit`, overrides the above
//!
//! [evolution]
//! method = "auto"           # auto | exact | krylov
//! refresh_per_time = false
//!
//! [spectra]
//! bulk_fraction = 0.6
//! truncation_tolerance = 1e-12
//! truncate = true
//! unfolding_degree = 7
//! spacing_bins = 50
//! spacing_max = 5.0
//! sigma2_lengths = [0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0]
//!
//! [fit]
//! enabled = true            # default depends on kind
//! form = "scale-shift"      # scale-shift | scale-shift-amplitude | shift-inside
//! abscissa = "nt"           # nt | t
//!
//! [short_time]
//! ensembles = 200
//! order_dimension = 32
//! order_points = 9
//!
//! [budget]
//! max_flops = 1e14
//! max_memory_bytes = 4e9
//! ```
//!
//! Omitted tables and keys take the defaults shown; unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::HamiltonianEnsembleSpec;
use crate::error::{Error, Result};
use crate::evolution::{validate_time_grid, PropagationMethod};
use crate::fitting::{Abscissa, CrossoverFitModel, ModelForm};
use crate::short_time::ShortTimeSettings;
use crate::spectra::SpectralSettings;

/// Name of the worker-count environment override.
pub const WORKERS_ENV: &str = "RMTMIX_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GoeMix,
    GueMix,
    CrossoverHamiltonian,
    SpinHf,
    SpinOe,
    ShortTimeCheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GoeMix => "goe-mix",
            Self::GueMix => "gue-mix",
            Self::CrossoverHamiltonian => "crossover-hamiltonian",
            Self::SpinHf => "spin-hf",
            Self::SpinOe => "spin-oe",
            Self::ShortTimeCheck => "short-time-check",
        }
    }

    pub fn is_spin(self) -> bool {
        matches!(self, Self::SpinHf | Self::SpinOe)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_seed() -> u64 {
    2024
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialStateKind {
    Basis,
    RandomReal,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSection {
    /// Defaults to `basis` for matrix ensembles, `random-real` for spins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<InitialStateKind>,
    #[serde(default)]
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridSpacing {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    /// Grid values are `N t`.
    Nt,
    /// Grid values are `t`.
    T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSection {
    #[serde(default = "default_spacing")]
    pub spacing: GridSpacing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<TimeUnit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn default_spacing() -> GridSpacing {
    GridSpacing::Log
}

fn default_count() -> usize {
    20
}

impl Default for TimeGridSection {
    fn default() -> Self {
        Self {
            spacing: default_spacing(),
            unit: None,
            start: None,
            stop: None,
            count: default_count(),
            values: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Auto,
    Exact,
    Krylov,
}

impl From<MethodName> for PropagationMethod {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Auto => PropagationMethod::Auto,
            MethodName::Exact => PropagationMethod::Exact,
            MethodName::Krylov => PropagationMethod::Krylov,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default = "default_method")]
    pub method: MethodName,
    /// Fresh Hamiltonians for every time instead of one ensemble per
    /// realization reused across the grid.
    #[serde(default)]
    pub refresh_per_time: bool,
}

fn default_method() -> MethodName {
    MethodName::Auto
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            refresh_per_time: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraSection {
    #[serde(default = "d_bulk")]
    pub bulk_fraction: f64,
    #[serde(default = "d_tol")]
    pub truncation_tolerance: f64,
    #[serde(default = "d_true")]
    pub truncate: bool,
    #[serde(default = "d_degree")]
    pub unfolding_degree: usize,
    #[serde(default = "d_bins")]
    pub spacing_bins: usize,
    #[serde(default = "d_smax")]
    pub spacing_max: f64,
    #[serde(default = "d_lengths")]
    pub sigma2_lengths: Vec<f64>,
}

fn d_bulk() -> f64 {
    SpectralSettings::default().bulk_fraction
}
fn d_tol() -> f64 {
    SpectralSettings::default().truncation_tolerance
}
fn d_true() -> bool {
    true
}
fn d_degree() -> usize {
    SpectralSettings::default().unfolding_degree
}
fn d_bins() -> usize {
    SpectralSettings::default().spacing_bins
}
fn d_smax() -> f64 {
    SpectralSettings::default().spacing_max
}
fn d_lengths() -> Vec<f64> {
    SpectralSettings::default().sigma2_lengths
}

impl Default for SpectraSection {
    fn default() -> Self {
        Self {
            bulk_fraction: d_bulk(),
            truncation_tolerance: d_tol(),
            truncate: true,
            unfolding_degree: d_degree(),
            spacing_bins: d_bins(),
            spacing_max: d_smax(),
            sigma2_lengths: d_lengths(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitFormName {
    ScaleShift,
    ScaleShiftAmplitude,
    ShiftInside,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FitFormName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abscissa: Option<TimeUnit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShortTimeSection {
    #[serde(default = "d_ensembles")]
    pub ensembles: u64,
    #[serde(default = "d_order_dim")]
    pub order_dimension: usize,
    #[serde(default = "d_order_points")]
    pub order_points: usize,
}

fn d_ensembles() -> u64 {
    200
}
fn d_order_dim() -> usize {
    32
}
fn d_order_points() -> usize {
    9
}

impl Default for ShortTimeSection {
    fn default() -> Self {
        Self {
            ensembles: d_ensembles(),
            order_dimension: d_order_dim(),
            order_points: d_order_points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    #[serde(default = "d_max_flops")]
    pub max_flops: f64,
    #[serde(default = "d_max_memory")]
    pub max_memory_bytes: f64,
}

/// Roughly five hours of one core.
fn d_max_flops() -> f64 {
    1e14
}
fn d_max_memory() -> f64 {
    4e9
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            max_flops: d_max_flops(),
            max_memory_bytes: d_max_memory(),
        }
    }
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub initial_state: InitialStateSection,
    #[serde(default)]
    pub time_grid: TimeGridSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub spectra: SpectraSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub short_time: ShortTimeSection,
    #[serde(default)]
    pub budget: BudgetSection,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind
    }

    /// Hilbert-space dimension `N`.
    pub fn dimension(&self) -> Result<usize> {
        let s = &self.system;
        match self.kind() {
            ExperimentKind::SpinHf => {
                let l = require(s.chain_length, "system.chain_length")?;
                if l % 2 != 0 || l < 2 {
                    return Err(Error::Config(format!("spin-hf needs an even chain_length >= 2, got {l}")));
                }
                if l > 20 {
                    return Err(Error::Config(format!("chain_length {l} is too large for half filling")));
                }
                Ok(crate::spin_chain::binomial(l, l / 2) as usize)
            }
            ExperimentKind::SpinOe => require(s.chain_length, "system.chain_length"),
            _ => require(s.dimension, "system.dimension"),
        }
    }

    /// Realization count `M`.
    pub fn realizations(&self) -> Result<u64> {
        require(self.experiment.realizations, "experiment.realizations")
    }

    pub fn ensemble_spec(&self) -> Result<HamiltonianEnsembleSpec> {
        let n = self.dimension()?;
        let s = &self.system;
        Ok(match self.kind() {
            ExperimentKind::GoeMix | ExperimentKind::ShortTimeCheck => HamiltonianEnsembleSpec::Goe { n },
            ExperimentKind::GueMix => HamiltonianEnsembleSpec::Gue { n },
            ExperimentKind::CrossoverHamiltonian => HamiltonianEnsembleSpec::Crossover {
                n,
                alpha: require(s.alpha, "system.alpha")?,
            },
            ExperimentKind::SpinHf => HamiltonianEnsembleSpec::SpinHalfFilling {
                chain_length: require(s.chain_length, "system.chain_length")?,
                disorder: require(s.disorder, "system.disorder")?,
            },
            ExperimentKind::SpinOe => HamiltonianEnsembleSpec::SpinOneExcitation {
                chain_length: n,
                disorder: require(s.disorder, "system.disorder")?,
            },
        })
    }

    pub fn initial_state_kind(&self) -> InitialStateKind {
        self.initial_state.kind.unwrap_or(if self.kind().is_spin() {
            InitialStateKind::RandomReal
        } else {
            InitialStateKind::Basis
        })
    }

    /// Unit of the grid values: `nt` for matrix ensembles, `t` for spins.
    pub fn time_unit(&self) -> TimeUnit {
        self.time_grid.unit.unwrap_or(if self.kind().is_spin() { TimeUnit::T } else { TimeUnit::Nt })
    }

    /// Grid values in the configured unit.
    pub fn grid_values(&self) -> Result<Vec<f64>> {
        let g = &self.time_grid;
        if let Some(v) = &g.values {
            return Ok(v.clone());
        }
        let (d_start, d_stop) = if self.kind().is_spin() { (1e-2, 1e2) } else { (1e-2, 1e1) };
        let (a, b) = (g.start.unwrap_or(d_start), g.stop.unwrap_or(d_stop));
        let n = g.count;
        if n == 0 {
            return Err(Error::Config("time_grid.count must be positive".into()));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        match g.spacing {
            GridSpacing::Linear => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
            GridSpacing::Log => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Config("log time grids need positive endpoints".into()));
                }
                let (la, lb) = (a.ln(), b.ln());
                Ok((0..n)
                    .map(|k| match k {
                        0 => a,
                        k if k == n - 1 => b,
                        k => (la + (lb - la) * k as f64 / (n - 1) as f64).exp(),
                    })
                    .collect())
            }
        }
    }

    /// Physical times `t`.
    pub fn times(&self) -> Result<Vec<f64>> {
        let values = self.grid_values()?;
        let times: Vec<f64> = match self.time_unit() {
            TimeUnit::T => values,
            TimeUnit::Nt => {
                let n = self.dimension()? as f64;
                values.iter().map(|v| v / n).collect()
            }
        };
        validate_time_grid(&times)?;
        Ok(times)
    }

    pub fn spectral_settings(&self) -> SpectralSettings {
        let s = &self.spectra;
        SpectralSettings {
            bulk_fraction: s.bulk_fraction,
            truncation_tolerance: s.truncation_tolerance,
            unfolding_degree: s.unfolding_degree,
            spacing_bins: s.spacing_bins,
            spacing_max: s.spacing_max,
            sigma2_lengths: s.sigma2_lengths.clone(),
            truncate: s.truncate,
            densities: true,
        }
    }

    /// The crossover fit this run performs, if any. Defaults: `goe-mix`
    /// fits `r(a Nt) + b`, `spin-hf` fits `r(a t) c + b`, `spin-oe` fits
    /// `r(a t) + b`; the other kinds do not fit.
    pub fn fit_model(&self) -> Option<CrossoverFitModel> {
        let (default_on, form, abscissa) = match self.kind() {
            ExperimentKind::GoeMix => (true, ModelForm::ScaleShift, Abscissa::ScaledTime),
            ExperimentKind::SpinHf => (true, ModelForm::ScaleShiftAmplitude, Abscissa::Time),
            ExperimentKind::SpinOe => (true, ModelForm::ScaleShift, Abscissa::Time),
            ExperimentKind::GueMix | ExperimentKind::CrossoverHamiltonian => {
                (false, ModelForm::ScaleShift, Abscissa::ScaledTime)
            }
            ExperimentKind::ShortTimeCheck => return None,
        };
        let f = &self.fit;
        if !f.enabled.unwrap_or(default_on) {
            return None;
        }
        let form = f.form.map_or(form, |x| match x {
            FitFormName::ScaleShift => ModelForm::ScaleShift,
            FitFormName::ScaleShiftAmplitude => ModelForm::ScaleShiftAmplitude,
            FitFormName::ShiftInside => ModelForm::ShiftInside,
        });
        let abscissa = f.abscissa.map_or(abscissa, |x| match x {
            TimeUnit::Nt => Abscissa::ScaledTime,
            TimeUnit::T => Abscissa::Time,
        });
        Some(CrossoverFitModel::new(form, abscissa))
    }

    pub fn short_time_settings(&self) -> Result<ShortTimeSettings> {
        let st = &self.short_time;
        Ok(ShortTimeSettings {
            dimension: self.dimension()?,
            ensembles: st.ensembles,
            seed: self.experiment.seed,
            order_dimension: st.order_dimension,
            order_points: st.order_points,
        })
    }

    /// Worker threads: `RMTMIX_WORKERS` if set, else the config value, else
    /// the available parallelism.
    pub fn workers(&self) -> Result<usize> {
        let from_env = match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|&w| w > 0).ok_or_else(|| {
                Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        };
        Ok(from_env
            .or(self.experiment.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
    }

    /// Checks ranges and kind-specific required fields.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind();
        let n = self.dimension()?;
        if n < 2 {
            return Err(Error::Config(format!("dimension {n} is too small (need >= 2)")));
        }
        if let Some(w) = self.experiment.workers {
            if w == 0 {
                return Err(Error::Config("experiment.workers must be positive".into()));
            }
        }
        let s = &self.system;
        match kind {
            ExperimentKind::SpinHf | ExperimentKind::SpinOe => {
                let h = require(s.disorder, "system.disorder")?;
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::Config(format!("system.disorder must be positive, got {h}")));
                }
                if s.dimension.is_some() || s.alpha.is_some() {
                    return Err(Error::Config(format!(
                        "{} takes chain_length and disorder, not dimension or alpha",
                        kind.as_str()
                    )));
                }
            }
            ExperimentKind::CrossoverHamiltonian => {
                let a = require(s.alpha, "system.alpha")?;
                if !a.is_finite() {
                    return Err(Error::Config("system.alpha must be finite".into()));
                }
            }
            _ => {
                if s.chain_length.is_some() || s.disorder.is_some() || s.alpha.is_some() {
                    return Err(Error::Config(format!(
                        "{} takes only system.dimension",
                        kind.as_str()
                    )));
                }
            }
        }
        if kind == ExperimentKind::ShortTimeCheck {
            let st = &self.short_time;
            if st.ensembles < 2 || st.order_points < 3 || st.order_dimension < 4 {
                return Err(Error::Config(
                    "short_time needs ensembles >= 2, order_points >= 3, order_dimension >= 4".into(),
                ));
            }
            return Ok(());
        }
        let m = self.realizations()?;
        if m == 0 {
            return Err(Error::Config("experiment.realizations must be positive".into()));
        }
        if self.initial_state_kind() == InitialStateKind::Basis && self.initial_state.index >= n {
            return Err(Error::Config(format!(
                "initial_state.index {} out of range for dimension {n}",
                self.initial_state.index
            )));
        }
        self.times()?;
        let sp = &self.spectra;
        if !(sp.bulk_fraction > 0.0 && sp.bulk_fraction <= 1.0) {
            return Err(Error::Config(format!("spectra.bulk_fraction must lie in (0, 1], got {}", sp.bulk_fraction)));
        }
        if !(sp.truncation_tolerance >= 0.0 && sp.truncation_tolerance < 1.0) {
            return Err(Error::Config("spectra.truncation_tolerance must lie in [0, 1)".into()));
        }
        if sp.unfolding_degree == 0 || sp.unfolding_degree > 15 {
            return Err(Error::Config("spectra.unfolding_degree must lie in 1..=15".into()));
        }
        if sp.spacing_bins == 0 || !(sp.spacing_max > 0.0) {
            return Err(Error::Config("spacing histogram needs bins > 0 and spacing_max > 0".into()));
        }
        if sp.sigma2_lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("spectra.sigma2_lengths must be positive".into()));
        }
        let b = &self.budget;
        if !(b.max_flops > 0.0 && b.max_memory_bytes > 0.0) {
            return Err(Error::Config("budget limits must be positive".into()));
        }
        Ok(())
    }

    /// Canonical TOML: fixed table and key order, so reordering the input
    /// file does not change it. The worker count is left out because it
    /// cannot change results.
    pub fn canonical_string(&self) -> String {
        let mut c = self.clone();
        c.experiment.workers = None;
        toml::to_string(&c).expect("config serializes")
    }

    /// Git-style object hash: SHA-256 of `"blob <len>\0" + canonical`.
    pub fn hash(&self) -> String {
        let body = self.canonical_string();
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing required key {key}")))
}
