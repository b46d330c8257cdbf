//! Plot-ready tables for the figure panels.
//!
//! | id      | content                                                     |
//! |---------|-------------------------------------------------------------|
//! | `fig1a` | eigenvalue density on the `lambda` scale, three times, MP   |
//! | `fig1b` | `<r~>` against `N t`, plateaus and the fitted crossover     |
//! | `fig1c` | spacing histogram, three times, GOE and GUE surmises        |
//! | `fig1d` | number variance, three times, GOE and GUE asymptotics       |
//! | `fig2a` | `<r~>` against `t` with the crossover fit (HF chain)        |
//! | `fig2b` | eigenvalue density at representative `t`, MP                |
//! | `fig3a` | as `fig2a` (OE chain)                                       |
//! | `fig3b` | as `fig2b`                                                  |
//!
//! `fig1`, `fig2`, `fig3` and `all` expand to their panels. Each panel is
//! one `<id>.tsv`: `# key = value` header lines (config hash, kind, the
//! selected times), then a `# `-prefixed line of column names, then
//! tab-separated rows. Density columns are bin averages, and so are the
//! analytic overlays, so both can be compared bin by bin.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fitting::Abscissa;
use crate::spectra::{
    marchenko_pastur_cdf, number_variance_asymptotic, wigner_surmise_cdf, DensityScaling, Histogram,
    SymmetryClass, R_TILDE_GOE, R_TILDE_GUE,
};

use super::artifact::{fmt, RunArtifact, TimeResult};
use super::run::r_tilde_curve;

pub const PANELS: [&str; 8] = ["fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig3a", "fig3b"];

/// Times (in `N t`) shown by the multi-time panels of the first figure.
const MATRIX_TARGETS: [f64; 3] = [0.01, 1.0, 10.0];
/// Times (in `t`) shown by the density panels of the spin figures.
const SPIN_TARGETS: [f64; 3] = [0.1, 20.0, 100.0];

/// Expands a figure id to panel ids.
pub fn panels(figure: &str) -> Result<Vec<&'static str>> {
    let id = figure.trim().to_ascii_lowercase();
    let id = id.strip_prefix("fig").unwrap_or(&id).to_string();
    let want: Vec<&'static str> = match id.as_str() {
        "all" => PANELS.to_vec(),
        "1" | "2" | "3" => PANELS.iter().copied().filter(|p| p[3..4] == id).collect(),
        _ => PANELS.iter().copied().filter(|p| p[3..] == id).collect(),
    };
    if want.is_empty() {
        return Err(Error::Config(format!(
            "unknown figure {figure:?}; expected one of {}, fig1, fig2, fig3 or all",
            PANELS.join(", ")
        )));
    }
    Ok(want)
}

/// Writes the panels of `figure` into `out_dir` and returns their paths.
pub fn emit_plot_data(artifact: &RunArtifact, figure: &str, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let ids = panels(figure)?;
    // Build everything first so a missing accumulator leaves no half output.
    let tables = ids
        .iter()
        .map(|id| panel_table(artifact, id).map(|t| (*id, t)))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::Parse {
        path: out_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut written = Vec::new();
    for (id, text) in tables {
        let path = out_dir.join(format!("{id}.tsv"));
        fs::write(&path, text).map_err(|e| Error::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
        written.push(path);
    }
    Ok(written)
}

/// The text of one panel.
pub fn panel_table(artifact: &RunArtifact, id: &str) -> Result<String> {
    match id {
        "fig1a" => density_panel(artifact, id, &pick(artifact, Abscissa::ScaledTime, &MATRIX_TARGETS)),
        "fig1b" => ratio_panel(artifact, id, Abscissa::ScaledTime),
        "fig1c" => spacing_panel(artifact, id, &pick(artifact, Abscissa::ScaledTime, &MATRIX_TARGETS)),
        "fig1d" => sigma2_panel(artifact, id, &pick(artifact, Abscissa::ScaledTime, &MATRIX_TARGETS)),
        "fig2a" | "fig3a" => ratio_panel(artifact, id, Abscissa::Time),
        "fig2b" | "fig3b" => density_panel(artifact, id, &pick(artifact, Abscissa::Time, &SPIN_TARGETS)),
        _ => Err(Error::Config(format!("unknown panel {id:?}"))),
    }
}

fn abscissa_value(artifact: &RunArtifact, t: &TimeResult, abscissa: Abscissa) -> f64 {
    match abscissa {
        Abscissa::ScaledTime => artifact.dimension() as f64 * t.time,
        Abscissa::Time => t.time,
    }
}

/// Indices of the times closest (logarithmically) to each target, deduplicated.
fn pick(artifact: &RunArtifact, abscissa: Abscissa, targets: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for &target in targets {
        let best = artifact
            .times
            .iter()
            .enumerate()
            .filter(|(_, t)| t.time > 0.0)
            .min_by(|(_, a), (_, b)| {
                let da = (abscissa_value(artifact, a, abscissa) / target).ln().abs();
                let db = (abscissa_value(artifact, b, abscissa) / target).ln().abs();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i);
        if let Some(i) = best {
            if !out.contains(&i) {
                out.push(i);
            }
        }
    }
    out
}

fn header(artifact: &RunArtifact, id: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# figure = {id}");
    let _ = writeln!(s, "# config_hash = {}", artifact.config_hash);
    let _ = writeln!(s, "# kind = {}", artifact.config.kind().as_str());
    let _ = writeln!(s, "# dimension = {}", artifact.dimension());
    let _ = writeln!(s, "# realizations = {}", artifact.realizations_completed);
    let _ = writeln!(s, "# complete = {}", artifact.complete);
    s
}

fn describe_times(s: &mut String, artifact: &RunArtifact, idx: &[usize]) {
    let n = artifact.dimension() as f64;
    for (k, &i) in idx.iter().enumerate() {
        let t = &artifact.times[i];
        let _ = writeln!(s, "# time_{k} = index {i}, t = {}, N t = {}", fmt(t.time), fmt(n * t.time));
    }
}

fn missing(id: &str, what: &str) -> Error {
    Error::MissingStatistics(format!("{id} needs {what}"))
}

fn columns(s: &mut String, names: &[String]) {
    let _ = writeln!(s, "# {}", names.join("\t"));
}

fn row(s: &mut String, values: &[String]) {
    let _ = writeln!(s, "{}", values.join("\t"));
}

/// Bin averages of a density given by its CDF.
fn bin_average(h: &Histogram, cdf: impl Fn(f64) -> f64) -> Vec<f64> {
    h.edges().windows(2).map(|w| (cdf(w[1]) - cdf(w[0])) / (w[1] - w[0])).collect()
}

fn density_panel(artifact: &RunArtifact, id: &str, idx: &[usize]) -> Result<String> {
    let chosen: Vec<&TimeResult> = idx.iter().map(|&i| &artifact.times[i]).collect();
    if chosen.is_empty() || chosen.iter().any(|t| t.statistics.density_trace.lambda.in_range() == 0) {
        return Err(missing(id, "eigenvalue-density histograms (density_trace, density_standardized)"));
    }
    let mut s = header(artifact, id);
    describe_times(&mut s, artifact, idx);
    let _ = writeln!(s, "# p_trace_k: density of N lambda; p_std_k: largest level removed, unit spread");
    let mut names = vec!["lambda_lo".to_string(), "lambda_hi".into(), "lambda".into()];
    for k in 0..chosen.len() {
        names.push(format!("p_trace_{k}"));
        names.push(format!("p_std_{k}"));
    }
    names.push("marchenko_pastur".into());
    columns(&mut s, &names);

    let reference = &chosen[0].statistics.density_trace.lambda;
    let dens: Vec<(Vec<f64>, Vec<f64>)> = chosen
        .iter()
        .map(|t| {
            (
                t.statistics.density(DensityScaling::TraceN).lambda.density(),
                t.statistics.density(DensityScaling::Standardized).lambda.density(),
            )
        })
        .collect();
    let mp = bin_average(reference, marchenko_pastur_cdf);
    let centers = reference.centers();
    for (b, w) in reference.edges().windows(2).enumerate() {
        let mut v = vec![fmt(w[0]), fmt(w[1]), fmt(centers[b])];
        for (tr, st) in &dens {
            v.push(fmt(tr[b]));
            v.push(fmt(st[b]));
        }
        v.push(fmt(mp[b]));
        row(&mut s, &v);
    }
    Ok(s)
}

fn ratio_panel(artifact: &RunArtifact, id: &str, abscissa: Abscissa) -> Result<String> {
    let curve = r_tilde_curve(artifact, abscissa);
    if curve.is_empty() {
        return Err(missing(id, "spacing-ratio accumulators (ratio) at one or more times"));
    }
    let fit = artifact.fits.iter().find(|f| f.model.abscissa == abscissa);
    let mut s = header(artifact, id);
    let _ = writeln!(s, "# r_goe = {}", fmt(R_TILDE_GOE));
    let _ = writeln!(s, "# r_gue = {}", fmt(R_TILDE_GUE));
    match fit {
        Some(f) => {
            let names = f.model.parameter_names();
            for (k, p) in f.result.parameters.iter().enumerate() {
                let _ = writeln!(s, "# fit.{} = {} +- {}", names[k], fmt(*p), fmt(f.result.standard_errors[k]));
            }
            let _ = writeln!(s, "# fit.range = {} {}", fmt(f.result.range.0), fmt(f.result.range.1));
        }
        None => {
            let why = artifact.fit_error.as_deref().unwrap_or("no fit configured for this abscissa");
            let _ = writeln!(s, "# fit = none ({why})");
        }
    }
    let x_name = match abscissa {
        Abscissa::ScaledTime => "Nt",
        Abscissa::Time => "t",
    };
    let mut names = vec![x_name.to_string(), "r_tilde".into(), "r_tilde_se".into(), "r_goe".into(), "r_gue".into()];
    if fit.is_some() {
        names.push("r_fit".into());
    }
    columns(&mut s, &names);
    for (x, y, se) in curve {
        let mut v = vec![fmt(x), fmt(y), fmt(se), fmt(R_TILDE_GOE), fmt(R_TILDE_GUE)];
        if let Some(f) = fit {
            v.push(fmt(f.model.eval(&f.result.parameters, x)));
        }
        row(&mut s, &v);
    }
    Ok(s)
}

fn spacing_panel(artifact: &RunArtifact, id: &str, idx: &[usize]) -> Result<String> {
    let chosen: Vec<&TimeResult> = idx.iter().map(|&i| &artifact.times[i]).collect();
    if chosen.is_empty() || chosen.iter().any(|t| t.statistics.spacing.in_range() == 0) {
        return Err(missing(id, "unfolded spacing histograms (spacing)"));
    }
    let mut s = header(artifact, id);
    describe_times(&mut s, artifact, idx);
    let mut names = vec!["s_lo".to_string(), "s_hi".into(), "s".into()];
    names.extend((0..chosen.len()).map(|k| format!("p_{k}")));
    names.push("goe_surmise".into());
    names.push("gue_surmise".into());
    columns(&mut s, &names);
    let h = &chosen[0].statistics.spacing;
    let goe = bin_average(h, |x| wigner_surmise_cdf(x, SymmetryClass::Goe));
    let gue = bin_average(h, |x| wigner_surmise_cdf(x, SymmetryClass::Gue));
    let dens: Vec<Vec<f64>> = chosen.iter().map(|t| t.statistics.spacing.density()).collect();
    let centers = h.centers();
    for (b, w) in h.edges().windows(2).enumerate() {
        let mut v = vec![fmt(w[0]), fmt(w[1]), fmt(centers[b])];
        v.extend(dens.iter().map(|d| fmt(d[b])));
        v.push(fmt(goe[b]));
        v.push(fmt(gue[b]));
        row(&mut s, &v);
    }
    Ok(s)
}

fn sigma2_panel(artifact: &RunArtifact, id: &str, idx: &[usize]) -> Result<String> {
    let chosen: Vec<&TimeResult> = idx.iter().map(|&i| &artifact.times[i]).collect();
    let tables: Vec<Vec<(f64, Option<f64>)>> = chosen.iter().map(|t| t.statistics.number_variance.table()).collect();
    if tables.is_empty() || tables.iter().all(|t| t.iter().all(|(_, v)| v.is_none())) {
        return Err(missing(id, "number-variance accumulators (number_variance)"));
    }
    let mut s = header(artifact, id);
    describe_times(&mut s, artifact, idx);
    let _ = writeln!(s, "# '-' marks window lengths too long for the unfolded bulk");
    let mut names = vec!["l".to_string()];
    names.extend((0..chosen.len()).map(|k| format!("sigma2_{k}")));
    names.push("goe".into());
    names.push("gue".into());
    columns(&mut s, &names);
    for (j, &(l, _)) in tables[0].iter().enumerate() {
        let mut v = vec![fmt(l)];
        v.extend(tables.iter().map(|t| t[j].1.map_or("-".to_string(), fmt)));
        v.push(fmt(number_variance_asymptotic(l, SymmetryClass::Goe)));
        v.push(fmt(number_variance_asymptotic(l, SymmetryClass::Gue)));
        row(&mut s, &v);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_expand() {
        assert_eq!(panels("fig1c").unwrap(), vec!["fig1c"]);
        assert_eq!(panels("2").unwrap(), vec!["fig2a", "fig2b"]);
        assert_eq!(panels("FIG3").unwrap(), vec!["fig3a", "fig3b"]);
        assert_eq!(panels("all").unwrap().len(), 8);
        assert!(matches!(panels("fig4"), Err(Error::Config(_))));
    }
}
