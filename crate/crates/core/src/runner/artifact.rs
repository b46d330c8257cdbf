//! Run artifacts and their directory layout.
//!
//! ```text
//! <dir>/config.snapshot      canonical TOML of the configuration
//! <dir>/summary.txt          key = value document
//! <dir>/stats/time_<i>.tsv   full accumulator state for time i
//! <dir>/fits.tsv             crossover fits
//! ```
//!
//! Tables are UTF-8, tab-separated, with `#` comment lines. Comments of the
//! form `# key = value` carry metadata; `# [name]` starts a section whose
//! next comment line names the columns. Floats use the shortest
//! representation that round-trips, so reading an artifact back restores
//! every accumulator bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fitting::{Abscissa, CrossoverFitModel, FitResult, ModelForm};
use crate::short_time::{OrderCheck, ShortTimeReport, VarianceCheck};
use crate::spectra::{
    DensityHistograms, Histogram, NumberVarianceAccumulator, RatioAccumulator, SpectralStatistics,
};

use super::config::ExperimentConfig;

pub const CONFIG_FILE: &str = "config.snapshot";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const FITS_FILE: &str = "fits.tsv";
pub const STATS_DIR: &str = "stats";

pub fn stats_file(index: usize) -> String {
    format!("time_{index}.tsv")
}

/// Per-time checks on every density matrix that went into the statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeDiagnostics {
    pub density_matrices: u64,
    pub purity_sum: f64,
    pub max_hermiticity_error: f64,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Default for TimeDiagnostics {
    fn default() -> Self {
        Self {
            density_matrices: 0,
            purity_sum: 0.0,
            max_hermiticity_error: 0.0,
            max_trace_error: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl TimeDiagnostics {
    pub fn merge(&mut self, other: &Self) {
        self.density_matrices += other.density_matrices;
        self.purity_sum += other.purity_sum;
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }

    pub fn mean_purity(&self) -> f64 {
        self.purity_sum / self.density_matrices as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeResult {
    pub index: usize,
    pub time: f64,
    /// The time in the grid's unit (`N t` or `t`).
    pub grid_value: f64,
    pub statistics: SpectralStatistics,
    pub diagnostics: TimeDiagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedFit {
    pub name: String,
    pub model: CrossoverFitModel,
    pub result: FitResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifact {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub library_version: String,
    pub times: Vec<TimeResult>,
    pub fits: Vec<NamedFit>,
    /// Why a configured fit produced no result.
    pub fit_error: Option<String>,
    pub short_time: Option<ShortTimeReport>,
    pub realizations_requested: u64,
    pub realizations_completed: u64,
    pub retries: u64,
    pub complete: bool,
    pub failure: Option<String>,
    pub wall_seconds: f64,
}

impl RunArtifact {
    pub fn dimension(&self) -> usize {
        self.config.dimension().unwrap_or(0)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join(STATS_DIR)).map_err(|e| io_err(dir, e))?;
        write_atomic(&dir.join(CONFIG_FILE), &self.config_snapshot())?;
        for t in &self.times {
            write_atomic(&dir.join(STATS_DIR).join(stats_file(t.index)), &self.stats_table(t))?;
        }
        write_atomic(&dir.join(FITS_FILE), &self.fits_table())?;
        write_atomic(&dir.join(SUMMARY_FILE), &self.summary())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let cfg_path = dir.join(CONFIG_FILE);
        let config = ExperimentConfig::load(&cfg_path)?;
        let summary = KeyValues::parse(&read_text(&dir.join(SUMMARY_FILE))?, &dir.join(SUMMARY_FILE))?;
        let sp = dir.join(SUMMARY_FILE);
        let count: usize = summary.get(&sp, "time_points")?;
        let settings = config.spectral_settings();
        let mut times = Vec::with_capacity(count);
        for i in 0..count {
            let path = dir.join(STATS_DIR).join(stats_file(i));
            times.push(read_stats_table(&read_text(&path)?, &path, &settings)?);
        }
        let fits_path = dir.join(FITS_FILE);
        let fits = read_fits_table(&read_text(&fits_path)?, &fits_path)?;
        let short_time = if summary.contains("short_time.dimension") {
            Some(read_short_time(&summary, &sp)?)
        } else {
            None
        };
        Ok(Self {
            config_hash: summary.get_str(&sp, "config_hash")?.to_string(),
            library_version: summary.get_str(&sp, "library_version")?.to_string(),
            config,
            times,
            fits,
            fit_error: summary.get_opt_str("fit_error").map(str::to_string),
            short_time,
            realizations_requested: summary.get(&sp, "realizations_requested")?,
            realizations_completed: summary.get(&sp, "realizations_completed")?,
            retries: summary.get(&sp, "retries")?,
            complete: summary.get(&sp, "complete")?,
            failure: summary.get_opt_str("failure").map(str::to_string),
            wall_seconds: summary.get(&sp, "wall_seconds")?,
        })
    }

    fn config_snapshot(&self) -> String {
        format!("# config_hash = {}\n{}", self.config_hash, self.config.canonical_string())
    }

    /// The key/value summary document.
    pub fn summary(&self) -> String {
        let mut s = String::from("# rmtmix run summary\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("format", "rmtmix-run-1".into());
        kv("kind", self.config.kind().as_str().into());
        if let Some(name) = &self.config.experiment.name {
            kv("name", name.clone());
        }
        kv("config_hash", self.config_hash.clone());
        kv("library_version", self.library_version.clone());
        kv("complete", self.complete.to_string());
        if let Some(f) = &self.failure {
            kv("failure", one_line(f));
        }
        kv("dimension", self.dimension().to_string());
        kv("seed", self.config.experiment.seed.to_string());
        kv("realizations_requested", self.realizations_requested.to_string());
        kv("realizations_completed", self.realizations_completed.to_string());
        kv(
            "dimension_times_realizations",
            (self.dimension() as u64 * self.realizations_completed).to_string(),
        );
        kv("retries", self.retries.to_string());
        kv("wall_seconds", fmt(self.wall_seconds));
        kv("time_points", self.times.len().to_string());
        for t in &self.times {
            let p = format!("time.{}", t.index);
            let st = &t.statistics;
            kv(&format!("{p}.t"), fmt(t.time));
            kv(&format!("{p}.grid_value"), fmt(t.grid_value));
            if st.ratio.count() > 0 {
                kv(&format!("{p}.r_tilde"), fmt(st.ratio.mean()));
                kv(&format!("{p}.r_tilde_stderr"), fmt(st.ratio.stderr()));
            }
            kv(&format!("{p}.bulk_levels"), st.bulk_levels.to_string());
            if t.diagnostics.density_matrices > 0 {
                kv(&format!("{p}.mean_purity"), fmt(t.diagnostics.mean_purity()));
                kv(&format!("{p}.min_eigenvalue"), fmt(t.diagnostics.min_eigenvalue));
            }
        }
        for (i, f) in self.fits.iter().enumerate() {
            let p = format!("fit.{i}");
            kv(&format!("{p}.name"), f.name.clone());
            kv(&format!("{p}.form"), form_name(f.model.form).into());
            kv(&format!("{p}.abscissa"), abscissa_name(f.model.abscissa).into());
            for (k, name) in f.model.parameter_names().iter().enumerate() {
                kv(&format!("{p}.{name}"), fmt(f.result.parameters[k]));
                kv(&format!("{p}.{name}_stderr"), fmt(f.result.standard_errors[k]));
            }
            kv(&format!("{p}.converged"), f.result.converged.to_string());
            kv(&format!("{p}.range_upper"), fmt(f.result.range.1));
        }
        if let Some(e) = &self.fit_error {
            kv("fit_error", one_line(e));
        }
        if let Some(r) = &self.short_time {
            write_short_time(&mut kv, r);
        }
        s
    }

    fn stats_table(&self, t: &TimeResult) -> String {
        let st = &t.statistics;
        let d = &t.diagnostics;
        let mut s = String::from("# rmtmix spectral statistics\n");
        let mut meta = |k: &str, v: String| {
            let _ = writeln!(s, "# {k} = {v}");
        };
        meta("config_hash", self.config_hash.clone());
        meta("index", t.index.to_string());
        meta("time", fmt(t.time));
        meta("grid_value", fmt(t.grid_value));
        meta("spectra", st.spectra.to_string());
        meta("retained_levels", st.retained_levels.to_string());
        meta("bulk_levels", st.bulk_levels.to_string());
        meta("short_trace", st.short_trace.to_string());
        meta("unfolding_failures", st.unfolding_failures.to_string());
        meta("unfolded_spectra", st.unfolded_spectra.to_string());
        meta("unfolded_spacing_sum", fmt(st.unfolded_spacing_sum));
        meta("unfolded_spacing_sq", fmt(st.unfolded_spacing_sq));
        meta("density_matrices", d.density_matrices.to_string());
        meta("purity_sum", fmt(d.purity_sum));
        meta("max_hermiticity_error", fmt(d.max_hermiticity_error));
        meta("max_trace_error", fmt(d.max_trace_error));
        meta("min_eigenvalue", fmt(d.min_eigenvalue));

        let r = &st.ratio;
        s.push_str("# [ratio]\n# sum\tsum_sq\tcount\tskipped\trealizations\tsum_means\tsum_means_sq\n");
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fmt(r.sum),
            fmt(r.sum_sq),
            r.count,
            r.skipped,
            r.realizations,
            fmt(r.sum_means),
            fmt(r.sum_means_sq)
        );
        histogram_section(&mut s, "spacing", &st.spacing);
        let nv = &st.number_variance;
        s.push_str("# [sigma2]\n# length\twindows\tsum_n\tsum_n2\texcluded\tsigma2\n");
        for (k, (l, v)) in nv.table().into_iter().enumerate() {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                fmt(l),
                nv.windows()[k],
                nv.sum_n()[k],
                nv.sum_n2()[k],
                nv.excluded()[k],
                v.map_or("nan".to_string(), fmt)
            );
        }
        histogram_section(&mut s, "density.trace.lambda", &st.density_trace.lambda);
        histogram_section(&mut s, "density.trace.sqrt_lambda", &st.density_trace.sqrt_lambda);
        histogram_section(&mut s, "density.standardized.lambda", &st.density_standardized.lambda);
        histogram_section(&mut s, "density.standardized.sqrt_lambda", &st.density_standardized.sqrt_lambda);
        s
    }

    fn fits_table(&self) -> String {
        let mut s = String::from("# rmtmix crossover fits\n");
        let _ = writeln!(s, "# config_hash = {}", self.config_hash);
        s.push_str(
            "# name\tform\tabscissa\tpoints\tx_min\tx_max\tresidual\titerations\tconverged\ta\ta_stderr\tb\tb_stderr\tc\tc_stderr\n",
        );
        for f in &self.fits {
            let r = &f.result;
            let _ = write!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                f.name,
                form_name(f.model.form),
                abscissa_name(f.model.abscissa),
                r.points,
                fmt(r.range.0),
                fmt(r.range.1),
                fmt(r.residual),
                r.iterations,
                r.converged
            );
            for k in 0..3 {
                match (r.parameters.get(k), r.standard_errors.get(k)) {
                    (Some(p), Some(e)) => {
                        let _ = write!(s, "\t{}\t{}", fmt(*p), fmt(*e));
                    }
                    _ => s.push_str("\t-\t-"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip representation.
pub(crate) fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

fn form_name(f: ModelForm) -> &'static str {
    match f {
        ModelForm::ScaleShift => "scale-shift",
        ModelForm::ScaleShiftAmplitude => "scale-shift-amplitude",
        ModelForm::ShiftInside => "shift-inside",
    }
}

fn abscissa_name(a: Abscissa) -> &'static str {
    match a {
        Abscissa::ScaledTime => "nt",
        Abscissa::Time => "t",
    }
}

fn histogram_section(s: &mut String, name: &str, h: &Histogram) {
    let _ = writeln!(s, "# [{name}]");
    let _ = writeln!(s, "# underflow = {}", h.underflow());
    let _ = writeln!(s, "# overflow = {}", h.overflow());
    s.push_str("# lo\thi\tcount\tdensity\n");
    let density = h.density();
    for k in 0..h.bins() {
        let e = h.edges();
        let _ = writeln!(s, "{}\t{}\t{}\t{}", fmt(e[k]), fmt(e[k + 1]), h.counts()[k], fmt(density[k]));
    }
}

fn write_short_time(kv: &mut impl FnMut(&str, String), r: &ShortTimeReport) {
    kv("short_time.dimension", r.dimension.to_string());
    kv("short_time.ensembles", r.ensembles.to_string());
    for (name, c) in [
        ("b_diagonal", &r.b_diagonal),
        ("b_off_diagonal", &r.b_off_diagonal),
        ("d_off_diagonal", &r.d_off_diagonal),
    ] {
        kv(&format!("short_time.{name}.estimate"), fmt(c.estimate));
        kv(&format!("short_time.{name}.stderr"), fmt(c.stderr));
        kv(&format!("short_time.{name}.target"), fmt(c.target));
        kv(&format!("short_time.{name}.z"), fmt(c.z_score()));
    }
    kv("short_time.b_mean", fmt(r.b_mean.0));
    kv("short_time.b_mean_stderr", fmt(r.b_mean.1));
    kv("short_time.d_exact_variance", fmt(r.d_exact_variance));
    kv("short_time.d_block_estimate", fmt(r.d_block_estimate.0));
    kv("short_time.d_block_stderr", fmt(r.d_block_estimate.1));
    kv("short_time.order.dimension", r.order.dimension.to_string());
    kv("short_time.order.times", join(&r.order.times));
    kv("short_time.order.errors", join(&r.order.errors));
    kv("short_time.order.slope", fmt(r.order.slope));
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(",")
}

fn read_short_time(kv: &KeyValues, path: &Path) -> Result<ShortTimeReport> {
    let check = |name: &str| -> Result<VarianceCheck> {
        Ok(VarianceCheck {
            estimate: kv.get(path, &format!("short_time.{name}.estimate"))?,
            stderr: kv.get(path, &format!("short_time.{name}.stderr"))?,
            target: kv.get(path, &format!("short_time.{name}.target"))?,
        })
    };
    let list = |key: &str| -> Result<Vec<f64>> {
        kv.get_str(path, key)?
            .split(',')
            .filter(|x| !x.is_empty())
            .map(|x| parse_f64(x, path))
            .collect()
    };
    Ok(ShortTimeReport {
        dimension: kv.get(path, "short_time.dimension")?,
        ensembles: kv.get(path, "short_time.ensembles")?,
        b_diagonal: check("b_diagonal")?,
        b_off_diagonal: check("b_off_diagonal")?,
        d_off_diagonal: check("d_off_diagonal")?,
        b_mean: (kv.get(path, "short_time.b_mean")?, kv.get(path, "short_time.b_mean_stderr")?),
        d_exact_variance: kv.get(path, "short_time.d_exact_variance")?,
        d_block_estimate: (
            kv.get(path, "short_time.d_block_estimate")?,
            kv.get(path, "short_time.d_block_stderr")?,
        ),
        order: OrderCheck {
            dimension: kv.get(path, "short_time.order.dimension")?,
            times: list("short_time.order.times")?,
            errors: list("short_time.order.errors")?,
            slope: kv.get(path, "short_time.order.slope")?,
        },
    })
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Writes through a temporary file and a rename, so an interrupted run
/// never leaves a half-written table behind.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp: PathBuf = path.with_extension("partial");
    fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn parse_f64(x: &str, path: &Path) -> Result<f64> {
    x.trim().parse().map_err(|_| parse_err(path, format!("not a number: {x:?}")))
}

fn parse_u64(x: &str, path: &Path) -> Result<u64> {
    x.trim().parse().map_err(|_| parse_err(path, format!("not a count: {x:?}")))
}

/// `key = value` lines, ignoring blank lines and `#` comments.
pub(crate) struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub(crate) fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| parse_err(path, format!("expected `key = value`, got {line:?}")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn get_opt_str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get_str(&self, path: &Path, key: &str) -> Result<&str> {
        self.get_opt_str(key).ok_or_else(|| parse_err(path, format!("missing key {key}")))
    }

    fn get<T: std::str::FromStr>(&self, path: &Path, key: &str) -> Result<T> {
        let v = self.get_str(path, key)?;
        v.parse().map_err(|_| parse_err(path, format!("bad value for {key}: {v:?}")))
    }
}

/// Sections and metadata of one statistics table.
struct Table {
    meta: BTreeMap<String, String>,
    sections: BTreeMap<String, (BTreeMap<String, String>, Vec<Vec<String>>)>,
}

impl Table {
    fn parse(text: &str) -> Self {
        let mut meta = BTreeMap::new();
        let mut sections: BTreeMap<String, (BTreeMap<String, String>, Vec<Vec<String>>)> = BTreeMap::new();
        let mut current: Option<String> = None;
        for line in text.lines() {
            if let Some(c) = line.strip_prefix('#') {
                let c = c.trim();
                if let Some(name) = c.strip_prefix('[').and_then(|x| x.strip_suffix(']')) {
                    sections.entry(name.to_string()).or_default();
                    current = Some(name.to_string());
                } else if let Some((k, v)) = c.split_once(" = ") {
                    let target = match &current {
                        Some(sec) => &mut sections.get_mut(sec).expect("section exists").0,
                        None => &mut meta,
                    };
                    target.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else if !line.trim().is_empty() {
                if let Some(sec) = &current {
                    let row = line.split('\t').map(str::to_string).collect();
                    sections.get_mut(sec).expect("section exists").1.push(row);
                }
            }
        }
        Self { meta, sections }
    }

    fn meta<T: std::str::FromStr>(&self, path: &Path, key: &str) -> Result<T> {
        let v = self.meta.get(key).ok_or_else(|| parse_err(path, format!("missing metadata {key}")))?;
        v.parse().map_err(|_| parse_err(path, format!("bad metadata {key}: {v:?}")))
    }

    fn section(&self, path: &Path, name: &str) -> Result<&(BTreeMap<String, String>, Vec<Vec<String>>)> {
        self.sections
            .get(name)
            .ok_or_else(|| parse_err(path, format!("missing section [{name}]")))
    }

    fn histogram(&self, path: &Path, name: &str) -> Result<Histogram> {
        let (meta, rows) = self.section(path, name)?;
        let get = |k: &str| -> Result<u64> {
            parse_u64(meta.get(k).ok_or_else(|| parse_err(path, format!("[{name}] lacks {k}")))?, path)
        };
        let mut edges = Vec::with_capacity(rows.len() + 1);
        let mut counts = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() < 3 {
                return Err(parse_err(path, format!("[{name}] row {i} is short")));
            }
            if i == 0 {
                edges.push(parse_f64(&row[0], path)?);
            }
            edges.push(parse_f64(&row[1], path)?);
            counts.push(parse_u64(&row[2], path)?);
        }
        Histogram::from_parts(edges, counts, get("underflow")?, get("overflow")?)
    }
}

fn read_stats_table(
    text: &str,
    path: &Path,
    settings: &crate::spectra::SpectralSettings,
) -> Result<TimeResult> {
    let t = Table::parse(text);
    let (_, ratio_rows) = t.section(path, "ratio")?;
    let r = ratio_rows.first().filter(|r| r.len() >= 7).ok_or_else(|| parse_err(path, "[ratio] needs one row of 7 columns"))?;
    let ratio = RatioAccumulator {
        sum: parse_f64(&r[0], path)?,
        sum_sq: parse_f64(&r[1], path)?,
        count: parse_u64(&r[2], path)?,
        skipped: parse_u64(&r[3], path)?,
        realizations: parse_u64(&r[4], path)?,
        sum_means: parse_f64(&r[5], path)?,
        sum_means_sq: parse_f64(&r[6], path)?,
    };
    let (_, nv_rows) = t.section(path, "sigma2")?;
    let mut cols: [Vec<u64>; 4] = Default::default();
    let mut lengths = Vec::new();
    for row in nv_rows {
        if row.len() < 5 {
            return Err(parse_err(path, "[sigma2] row is short"));
        }
        lengths.push(parse_f64(&row[0], path)?);
        for c in 0..4 {
            cols[c].push(parse_u64(&row[c + 1], path)?);
        }
    }
    let [windows, sum_n, sum_n2, excluded] = cols;
    let number_variance = NumberVarianceAccumulator::from_parts(lengths, windows, sum_n, sum_n2, excluded)?;
    let statistics = SpectralStatistics {
        settings: settings.clone(),
        ratio,
        spacing: t.histogram(path, "spacing")?,
        number_variance,
        density_trace: DensityHistograms {
            lambda: t.histogram(path, "density.trace.lambda")?,
            sqrt_lambda: t.histogram(path, "density.trace.sqrt_lambda")?,
        },
        density_standardized: DensityHistograms {
            lambda: t.histogram(path, "density.standardized.lambda")?,
            sqrt_lambda: t.histogram(path, "density.standardized.sqrt_lambda")?,
        },
        spectra: t.meta(path, "spectra")?,
        retained_levels: t.meta(path, "retained_levels")?,
        bulk_levels: t.meta(path, "bulk_levels")?,
        short_trace: t.meta(path, "short_trace")?,
        unfolding_failures: t.meta(path, "unfolding_failures")?,
        unfolded_spacing_sum: t.meta(path, "unfolded_spacing_sum")?,
        unfolded_spacing_sq: t.meta(path, "unfolded_spacing_sq")?,
        unfolded_spectra: t.meta(path, "unfolded_spectra")?,
    };
    Ok(TimeResult {
        index: t.meta(path, "index")?,
        time: t.meta(path, "time")?,
        grid_value: t.meta(path, "grid_value")?,
        statistics,
        diagnostics: TimeDiagnostics {
            density_matrices: t.meta(path, "density_matrices")?,
            purity_sum: t.meta(path, "purity_sum")?,
            max_hermiticity_error: t.meta(path, "max_hermiticity_error")?,
            max_trace_error: t.meta(path, "max_trace_error")?,
            min_eigenvalue: t.meta(path, "min_eigenvalue")?,
        },
    })
}

fn read_fits_table(text: &str, path: &Path) -> Result<Vec<NamedFit>> {
    let mut fits = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let c: Vec<&str> = line.split('\t').collect();
        if c.len() < 15 {
            return Err(parse_err(path, "fit row is short"));
        }
        let form = match c[1] {
            "scale-shift" => ModelForm::ScaleShift,
            "scale-shift-amplitude" => ModelForm::ScaleShiftAmplitude,
            "shift-inside" => ModelForm::ShiftInside,
            other => return Err(parse_err(path, format!("unknown fit form {other:?}"))),
        };
        let abscissa = match c[2] {
            "nt" => Abscissa::ScaledTime,
            "t" => Abscissa::Time,
            other => return Err(parse_err(path, format!("unknown abscissa {other:?}"))),
        };
        let model = CrossoverFitModel::new(form, abscissa);
        let mut parameters = Vec::new();
        let mut standard_errors = Vec::new();
        for k in 0..model.parameter_count() {
            parameters.push(parse_f64(c[9 + 2 * k], path)?);
            standard_errors.push(parse_f64(c[10 + 2 * k], path)?);
        }
        fits.push(NamedFit {
            name: c[0].to_string(),
            model,
            result: FitResult {
                parameters,
                standard_errors,
                residual: parse_f64(c[6], path)?,
                range: (parse_f64(c[4], path)?, parse_f64(c[5], path)?),
                iterations: parse_u64(c[7], path)? as usize,
                converged: c[8] == "true",
                points: parse_u64(c[3], path)? as usize,
            },
        });
    }
    Ok(fits)
}
