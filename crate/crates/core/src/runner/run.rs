//! Realization farming, ordered merging, checkpoints and fits.

use std::path::PathBuf;
use std::time::Instant;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::{basis_state, sample_real_state, HamiltonianSource, PureState};
use crate::error::{Error, Result};
use crate::evolution::{assemble_density, build_propagator, purity, KrylovOptions, PropagationMethod};
use crate::fitting::{fit_crossover_ranged, Abscissa, DataPoint, FitOptions};
use crate::rng::{lane, RngStream};
use crate::short_time::short_time_check;
use crate::spectra::{SpectralStatistics, SpectrumSample};

use super::artifact::{NamedFit, RunArtifact, TimeDiagnostics, TimeResult};
use super::config::{ExperimentConfig, ExperimentKind, InitialStateKind, TimeUnit};
use super::cost::estimate_cost;

/// Test hook deciding whether `(realization, attempt)` fails artificially.
pub type FaultInjector = fn(u64, u32) -> bool;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Artifact directory; also where checkpoints go.
    pub output: Option<PathBuf>,
    /// Continue from a partial artifact in `output` with the same config hash.
    pub resume: bool,
    /// Overrides the configured/environment worker count.
    pub workers: Option<usize>,
    /// Realizations between checkpoints (0: one chunk per worker round).
    pub checkpoint_every: u64,
    /// Stop after this many realizations in total, leaving an incomplete
    /// artifact that a later run can resume.
    pub stop_after: Option<u64>,
    pub fault: Option<FaultInjector>,
}

/// One realization's contribution at every time.
struct RealizationOutput {
    stats: Vec<SpectralStatistics>,
    diagnostics: Vec<TimeDiagnostics>,
}

struct Context {
    source: HamiltonianSource,
    seed: u64,
    dim: usize,
    times: Vec<f64>,
    initial: InitialStateKind,
    initial_index: usize,
    method: PropagationMethod,
    refresh: bool,
    settings: crate::spectra::SpectralSettings,
    kind: ExperimentKind,
}

impl Context {
    fn initial_state(&self, realization: u64) -> Result<PureState> {
        match self.initial {
            InitialStateKind::Basis => basis_state(self.dim, self.initial_index),
            InitialStateKind::RandomReal => sample_real_state(
                self.dim,
                &RngStream::for_member(self.seed, realization, 0, lane::INITIAL_STATE),
            ),
        }
    }

    /// Builds `rho(t)` for every time, checks its invariants and feeds its
    /// spectrum into fresh accumulators.
    fn realization(&self, r: u64) -> Result<RealizationOutput> {
        let n = self.dim;
        let psi0 = self.initial_state(r)?;
        // Time groups sharing one ensemble: the whole grid, or each time
        // alone (with its own Hamiltonians) when refreshing.
        let groups: Vec<(u32, Vec<usize>)> = if self.refresh {
            (0..self.times.len()).map(|k| (k as u32, vec![k])).collect()
        } else {
            vec![(0, (0..self.times.len()).collect())]
        };
        let mut stats = Vec::with_capacity(self.times.len());
        let mut diagnostics = Vec::with_capacity(self.times.len());
        for (slot, idx) in groups {
            let times: Vec<f64> = idx.iter().map(|&k| self.times[k]).collect();
            let mut psi: Vec<Mat<Complex64>> = times.iter().map(|_| Mat::zeros(n, n)).collect();
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for l in 0..n {
                let stream = RngStream::for_member(self.seed, r, l as u64, lane::HAMILTONIAN).with_slot(slot);
                let h = self.source.sample(&stream)?;
                let p = build_propagator(&h, &psi0, &times, self.method, KrylovOptions::default())?;
                for (k, &t) in times.iter().enumerate() {
                    p.write_state(t, &mut col);
                    psi[k].col_mut(l).iter_mut().zip(&col).for_each(|(d, s)| *d = *s);
                }
            }
            for (k, &t) in times.iter().enumerate() {
                let rho = assemble_density(psi[k].as_ref(), t);
                let eigs = rho.eigenvalues()?;
                let report = rho.invariants_with(&eigs);
                if !report.holds() {
                    return Err(Error::RealizationFailed {
                        realization: r,
                        message: format!("density matrix invariants violated at t = {t}: {report:?}"),
                    });
                }
                let d = TimeDiagnostics {
                    density_matrices: 1,
                    purity_sum: purity(&rho),
                    max_hermiticity_error: report.hermiticity_error,
                    max_trace_error: report.trace_error,
                    min_eigenvalue: report.min_eigenvalue,
                };
                let mut s = SpectralStatistics::new(self.settings.clone())?;
                s.push(&SpectrumSample::new(eigs, t, self.kind.as_str(), r), n)?;
                stats.push(s);
                diagnostics.push(d);
            }
        }
        Ok(RealizationOutput { stats, diagnostics })
    }
}

/// Runs `config`. With `opts.output` set, the artifact directory is
/// rewritten after every chunk of realizations, so an interrupted run can
/// be resumed; realizations are merged strictly in index order, which
/// makes the statistics independent of the worker count.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunArtifact> {
    config.validate()?;
    let started = Instant::now();
    let estimate = estimate_cost(config)?;
    let budget = &config.budget;
    if estimate.flops > budget.max_flops || estimate.memory_bytes > budget.max_memory_bytes {
        return Err(Error::ResourceRefused {
            estimate_flops: estimate.flops,
            budget_flops: budget.max_flops,
            estimate_memory_bytes: estimate.memory_bytes,
            budget_memory_bytes: budget.max_memory_bytes,
        });
    }
    faer::set_global_parallelism(faer::Par::Seq);
    let workers = match opts.workers {
        Some(w) if w > 0 => w,
        Some(_) => return Err(Error::Config("worker count must be positive".into())),
        None => config.workers()?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;

    if config.kind() == ExperimentKind::ShortTimeCheck {
        let report = pool.install(|| short_time_check(&config.short_time_settings()?))?;
        let artifact = RunArtifact {
            config: config.clone(),
            config_hash: config.hash(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            times: Vec::new(),
            fits: Vec::new(),
            fit_error: None,
            short_time: Some(report),
            realizations_requested: config.short_time.ensembles,
            realizations_completed: config.short_time.ensembles,
            retries: 0,
            complete: true,
            failure: None,
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        if let Some(dir) = &opts.output {
            artifact.write(dir)?;
        }
        return Ok(artifact);
    }

    let dim = config.dimension()?;
    let times = config.times()?;
    let grid = config.grid_values()?;
    let m = config.realizations()?;
    let ctx = Context {
        source: HamiltonianSource::new(config.ensemble_spec()?)?,
        seed: config.experiment.seed,
        dim,
        times: times.clone(),
        initial: config.initial_state_kind(),
        initial_index: config.initial_state.index,
        method: config.evolution.method.into(),
        refresh: config.evolution.refresh_per_time,
        settings: config.spectral_settings(),
        kind: config.kind(),
    };

    let mut artifact = match (&opts.output, opts.resume) {
        (Some(dir), true) if dir.join(super::artifact::SUMMARY_FILE).exists() => {
            let prior = RunArtifact::read(dir)?;
            if prior.config_hash != config.hash() {
                return Err(Error::Config(format!(
                    "cannot resume: {} was produced by config {} (this config is {})",
                    dir.display(),
                    prior.config_hash,
                    config.hash()
                )));
            }
            prior
        }
        _ => RunArtifact {
            config: config.clone(),
            config_hash: config.hash(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            times: times
                .iter()
                .zip(&grid)
                .enumerate()
                .map(|(index, (&time, &grid_value))| {
                    Ok(TimeResult {
                        index,
                        time,
                        grid_value,
                        statistics: SpectralStatistics::new(ctx.settings.clone())?,
                        diagnostics: TimeDiagnostics::default(),
                    })
                })
                .collect::<Result<_>>()?,
            fits: Vec::new(),
            fit_error: None,
            short_time: None,
            realizations_requested: m,
            realizations_completed: 0,
            retries: 0,
            complete: false,
            failure: None,
            wall_seconds: 0.0,
        },
    };
    let prior_seconds = artifact.wall_seconds;
    artifact.failure = None;

    let chunk = if opts.checkpoint_every > 0 { opts.checkpoint_every } else { 4 * workers as u64 };
    let end = opts.stop_after.map_or(m, |s| s.min(m));
    let mut next = artifact.realizations_completed;
    while next < end {
        let upto = (next + chunk).min(end);
        let outputs: Vec<(Result<RealizationOutput>, u32)> = pool.install(|| {
            (next..upto)
                .into_par_iter()
                .map(|r| attempt_with_retry(&ctx, r, opts.fault))
                .collect()
        });
        for (r, (out, attempts)) in (next..upto).zip(outputs) {
            artifact.retries += (attempts - 1) as u64;
            match out {
                Ok(o) => {
                    for (k, t) in artifact.times.iter_mut().enumerate() {
                        t.statistics.merge(&o.stats[k])?;
                        t.diagnostics.merge(&o.diagnostics[k]);
                    }
                    artifact.realizations_completed = r + 1;
                }
                Err(e) => {
                    artifact.failure = Some(format!("realization {r} failed twice: {e}"));
                    artifact.wall_seconds = prior_seconds + started.elapsed().as_secs_f64();
                    if let Some(dir) = &opts.output {
                        artifact.write(dir)?;
                    }
                    return Err(Error::RealizationFailed {
                        realization: r,
                        message: e.to_string(),
                    });
                }
            }
        }
        next = upto;
        artifact.wall_seconds = prior_seconds + started.elapsed().as_secs_f64();
        if let Some(dir) = &opts.output {
            if next < m {
                artifact.write(dir)?;
            }
        }
    }

    artifact.complete = artifact.realizations_completed == m;
    if artifact.complete {
        fit_artifact(&mut artifact);
    }
    artifact.wall_seconds = prior_seconds + started.elapsed().as_secs_f64();
    if let Some(dir) = &opts.output {
        artifact.write(dir)?;
    }
    Ok(artifact)
}

fn attempt_with_retry(ctx: &Context, r: u64, fault: Option<FaultInjector>) -> (Result<RealizationOutput>, u32) {
    let mut last = None;
    for attempt in 1..=2u32 {
        let out = if fault.is_some_and(|f| f(r, attempt)) {
            Err(Error::RealizationFailed {
                realization: r,
                message: format!("injected fault on attempt {attempt}"),
            })
        } else {
            ctx.realization(r)
        };
        match out {
            Ok(o) => return (Ok(o), attempt),
            Err(e) => last = Some(e),
        }
    }
    (Err(last.expect("two attempts")), 2)
}

/// `(x, <r~>, stderr)` for every time with ratios, `x` in the fit abscissa.
pub fn r_tilde_curve(artifact: &RunArtifact, abscissa: Abscissa) -> Vec<(f64, f64, f64)> {
    let n = artifact.dimension() as f64;
    artifact
        .times
        .iter()
        .filter(|t| t.statistics.ratio.count() > 0)
        .map(|t| {
            let x = match abscissa {
                Abscissa::ScaledTime => n * t.time,
                Abscissa::Time => t.time,
            };
            // Keep the grid's own value when it is exactly the abscissa, to
            // avoid round-off from the t <-> N t conversion.
            let x = match (abscissa, artifact.config.time_unit()) {
                (Abscissa::ScaledTime, TimeUnit::Nt) | (Abscissa::Time, TimeUnit::T) => t.grid_value,
                _ => x,
            };
            (x, t.statistics.ratio.mean(), t.statistics.ratio.stderr())
        })
        .collect()
}

/// Fits the configured crossover model; failures are recorded, not raised.
pub fn fit_artifact(artifact: &mut RunArtifact) {
    artifact.fits.clear();
    artifact.fit_error = None;
    let Some(model) = artifact.config.fit_model() else {
        return;
    };
    let data: Vec<DataPoint> = r_tilde_curve(artifact, model.abscissa)
        .into_iter()
        .map(|(x, y, se)| DataPoint::with_stderr(x, y, se))
        .collect();
    match fit_crossover_ranged(&data, &model, None, FitOptions::default()) {
        Ok(result) => artifact.fits.push(NamedFit {
            name: "crossover".into(),
            model,
            result,
        }),
        Err(e) => artifact.fit_error = Some(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::emit::emit_plot_data;

    fn small(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            "[experiment]\nkind = \"goe-mix\"\nrealizations = 6\nseed = 11\n\
             [system]\ndimension = 16\n[time_grid]\nvalues = [0.01, 1.0, 10.0]\n\
             [spectra]\nunfolding_degree = 3\nsigma2_lengths = [1.0, 2.0]\n{extra}"
        ))
        .unwrap()
    }

    fn opts(workers: usize) -> RunOptions {
        RunOptions {
            workers: Some(workers),
            checkpoint_every: 2,
            ..Default::default()
        }
    }

    fn stats(a: &RunArtifact) -> Vec<(&SpectralStatistics, &TimeDiagnostics)> {
        a.times.iter().map(|t| (&t.statistics, &t.diagnostics)).collect()
    }

    #[test]
    fn statistics_do_not_depend_on_workers() {
        let c = small("");
        let one = run_experiment(&c, &opts(1)).unwrap();
        let three = run_experiment(&c, &opts(3)).unwrap();
        assert!(one.complete && one.realizations_completed == 6);
        assert_eq!(stats(&one), stats(&three));
        assert_eq!(one.fits, three.fits);
        assert_eq!(one.times[0].diagnostics.density_matrices, 6);
        assert!(one.times[0].diagnostics.max_trace_error < 1e-12);
    }

    #[test]
    fn artifact_round_trips_and_emits() {
        let dir = tempfile::tempdir().unwrap();
        let c = small("");
        let a = run_experiment(&c, &RunOptions { output: Some(dir.path().into()), ..opts(2) }).unwrap();
        let back = RunArtifact::read(dir.path()).unwrap();
        assert_eq!(back, a);
        let out = dir.path().join("plots");
        let files = emit_plot_data(&back, "fig1", &out).unwrap();
        assert_eq!(files.len(), 4);
        for f in files {
            let text = std::fs::read_to_string(f).unwrap();
            assert!(text.contains(&format!("# config_hash = {}", a.config_hash)));
        }
    }

    #[test]
    fn resumed_run_equals_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = small("");
        let full = run_experiment(&c, &opts(1)).unwrap();
        let first = RunOptions {
            output: Some(dir.path().into()),
            stop_after: Some(3),
            ..opts(2)
        };
        let partial = run_experiment(&c, &first).unwrap();
        assert!(!partial.complete && partial.realizations_completed == 3);
        let on_disk = RunArtifact::read(dir.path()).unwrap();
        assert!(!on_disk.complete);
        let resumed = run_experiment(&c, &RunOptions { output: Some(dir.path().into()), resume: true, ..opts(3) }).unwrap();
        assert!(resumed.complete);
        assert_eq!(stats(&resumed), stats(&full));
        assert_eq!(resumed.fits, full.fits);

        // a different config refuses to resume into this directory
        let other = small("[evolution]\nmethod = \"exact\"\n");
        let err = run_experiment(&other, &RunOptions { output: Some(dir.path().into()), resume: true, ..opts(1) });
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn single_failures_are_retried() {
        let c = small("");
        let clean = run_experiment(&c, &opts(2)).unwrap();
        let flaky = run_experiment(&c, &RunOptions { fault: Some(|r, a| r == 2 && a == 1), ..opts(2) }).unwrap();
        assert_eq!(flaky.retries, 1);
        assert_eq!(stats(&flaky), stats(&clean));
    }

    #[test]
    fn double_failure_aborts_with_partial_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let c = small("");
        let o = RunOptions {
            output: Some(dir.path().into()),
            fault: Some(|r, _| r == 4),
            ..opts(2)
        };
        assert!(matches!(run_experiment(&c, &o), Err(Error::RealizationFailed { realization: 4, .. })));
        let partial = RunArtifact::read(dir.path()).unwrap();
        assert!(!partial.complete);
        assert_eq!(partial.realizations_completed, 4);
        assert!(partial.failure.unwrap().contains("realization 4"));
    }

    #[test]
    fn budget_refusal_and_missing_statistics() {
        let c = small("[budget]\nmax_flops = 1000.0\n");
        assert!(matches!(run_experiment(&c, &opts(1)), Err(Error::ResourceRefused { .. })));
        let empty = run_experiment(&small(""), &RunOptions { stop_after: Some(0), ..opts(1) }).unwrap();
        let err = emit_plot_data(&empty, "fig1c", std::path::Path::new("/nonexistent")).unwrap_err();
        match err {
            Error::MissingStatistics(m) => assert!(m.contains("spacing"), "{m}"),
            e => panic!("{e}"),
        }
        assert!(matches!(
            emit_plot_data(&empty, "fig1b", std::path::Path::new("/nonexistent")),
            Err(Error::MissingStatistics(_))
        ));
    }
}
