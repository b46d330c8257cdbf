//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every run uses the library defaults (seed 2024, default spectral
//! settings) at desk scale; tolerances are the published ones. A FAIL line
//! is a finding, not a harness error, so the process still exits 0; it
//! exits 1 only if a line could not be produced at all.

mod common;

use std::time::Instant;

use rmtmix::ensembles::{sample_goe, HamiltonianEnsembleSpec, HamiltonianSource};
use rmtmix::evolution::{decompose_real, hamiltonian_eigenvalues};
use rmtmix::gof::{chi_square, ChiSquare};
use rmtmix::rng::{lane, RngStream};
use rmtmix::runner::{run_experiment, ExperimentConfig, RunArtifact, RunOptions, TimeResult};
use rmtmix::short_time::{short_time_check, ShortTimeSettings};
use rmtmix::spectra::{
    marchenko_pastur_cdf, number_variance_asymptotic, quarter_circle_cdf, r_tilde_mean, wigner_surmise_cdf,
    DensityScaling, SpectralSettings, SpectralStatistics, SpectrumSample, SymmetryClass, LAMBDA_TEST_BINS, R_TILDE_GOE, R_TILDE_GUE, R_TILDE_MIDPOINT,
};

type Outcome = Result<(bool, String), String>;

fn run(toml: &str) -> Result<RunArtifact, String> {
    let cfg = ExperimentConfig::from_toml_str(toml).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let a = run_experiment(&cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
    eprintln!(
        "  ran {} N={} M={} in {:.0} s",
        cfg.kind().as_str(),
        a.dimension(),
        a.realizations_completed,
        started.elapsed().as_secs_f64()
    );
    Ok(a)
}

fn goe(n: usize, m: u64, grid: &str) -> String {
    format!("[experiment]\nkind = \"goe-mix\"\nrealizations = {m}\n[system]\ndimension = {n}\n[time_grid]\n{grid}\n")
}

/// The time whose grid value is `v`.
fn at(a: &RunArtifact, v: f64) -> &TimeResult {
    a.times
        .iter()
        .find(|t| (t.grid_value / v - 1.0).abs() < 1e-9)
        .expect("grid value present")
}

fn mp(t: &TimeResult, scaling: DensityScaling) -> Result<ChiSquare, String> {
    chi_square(&t.statistics.density(scaling).lambda, LAMBDA_TEST_BINS, marchenko_pastur_cdf).map_err(|e| e.to_string())
}

fn qc(t: &TimeResult) -> Result<ChiSquare, String> {
    let h = &t.statistics.density(DensityScaling::Standardized).sqrt_lambda;
    chi_square(h, LAMBDA_TEST_BINS, quarter_circle_cdf).map_err(|e| e.to_string())
}

fn surmise(t: &TimeResult, class: SymmetryClass) -> Result<ChiSquare, String> {
    let h = &t.statistics.spacing;
    chi_square(h, 0..h.bins(), |x| wigner_surmise_cdf(x, class)).map_err(|e| e.to_string())
}

fn r(t: &TimeResult) -> (f64, f64) {
    (t.statistics.ratio.mean(), t.statistics.ratio.stderr())
}

/// First midpoint crossing of `<r~>`, interpolated in `ln(N t)`.
fn crossing(a: &RunArtifact) -> Option<f64> {
    a.times.windows(2).find_map(|w| {
        let (r0, r1) = (w[0].statistics.ratio.mean(), w[1].statistics.ratio.mean());
        (r0 < R_TILDE_MIDPOINT && r1 >= R_TILDE_MIDPOINT).then(|| {
            let (x0, x1) = (w[0].grid_value.ln(), w[1].grid_value.ln());
            (x0 + (R_TILDE_MIDPOINT - r0) / (r1 - r0) * (x1 - x0)).exp()
        })
    })
}

fn c1(a: &RunArtifact) -> Outcome {
    let pooled = at(a, 0.01).statistics.bulk_levels;
    let (e, es) = r(at(a, 0.01));
    let (l, ls) = r(at(a, 10.0));
    let ok = pooled >= 100_000 && (e - R_TILDE_GOE).abs() <= 0.01 && (l - R_TILDE_GUE).abs() <= 0.01;
    Ok((ok, format!("pooled bulk = {pooled}; Nt=0.01: {e:.4}±{es:.4}; Nt=10: {l:.4}±{ls:.4} (targets 0.5307, 0.5996 ± 0.01)")))
}

fn c2(runs: &[(usize, RunArtifact)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut xs = Vec::new();
    for (n, a) in runs {
        let Some(x) = crossing(a) else {
            return Ok((false, format!("N={n}: no midpoint crossing on the grid")));
        };
        let factor = (x / *n as f64) / (2.0 / *n as f64);
        ok &= (1.0 / 3.0..=3.0).contains(&factor);
        parts.push(format!("N={n}: Nt*={x:.3} (t*/(2/N) = {factor:.2})"));
        xs.push(x);
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    ok &= spread <= 0.2;
    Ok((ok, format!("{}; spread (max/min - 1) = {:.1}% (≤ 20%)", parts.join(", "), 100.0 * spread)))
}

fn c3(a: &RunArtifact) -> Outcome {
    let f = a.fits.first().ok_or_else(|| format!("no fit: {}", a.fit_error.clone().unwrap_or_default()))?;
    let (pa, pb) = (f.result.parameters[0], f.result.parameters[1]);
    let (sa, sb) = (f.result.standard_errors[0], f.result.standard_errors[1]);
    let ok = f.result.converged && (0.24..=0.33).contains(&pa) && pb.abs() <= 0.02;
    Ok((ok, format!("N=256: a = {pa:.4}±{sa:.4}, b = {pb:.5}±{sb:.5}, converged = {}", f.result.converged)))
}

fn c4(a: &RunArtifact) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for v in [0.01, 1.0, 10.0] {
        let t = at(a, v);
        let (m, q) = (mp(t, DensityScaling::Standardized)?, qc(t)?);
        ok &= m.p_value > 0.01 && q.p_value > 0.01;
        let trace = mp(t, DensityScaling::TraceN).map_or("n/a".into(), |c| format!("{:.2e}", c.p_value));
        parts.push(format!("Nt={v}: p_MP={:.3} p_QC={:.3} [lambda N: p={trace}]", m.p_value, q.p_value));
    }
    Ok((ok, parts.join("; ")))
}

fn c5(a: &RunArtifact) -> Outcome {
    let (e, l) = (at(a, 0.01), at(a, 10.0));
    let (eg, eu) = (surmise(e, SymmetryClass::Goe)?, surmise(e, SymmetryClass::Gue)?);
    let (lg, lu) = (surmise(l, SymmetryClass::Goe)?, surmise(l, SymmetryClass::Gue)?);
    let ok = eg.p_value > 0.01 && eu.p_value < 1e-3 && lu.p_value > 0.01 && lg.p_value < 1e-3;
    // Not gated: GOE/GUE Hamiltonian spectra with the same sample count, to
    // show how far the surmises themselves are resolved at this statistics.
    let control = |spec, class| -> Result<f64, String> {
        let settings = SpectralSettings { truncate: false, densities: false, ..Default::default() };
        let source = HamiltonianSource::new(spec).map_err(|e| e.to_string())?;
        let mut stats = SpectralStatistics::new(settings).map_err(|e| e.to_string())?;
        let n = a.dimension();
        for k in 0..a.realizations_completed {
            let h = source.sample(&RngStream::for_member(2024, k, 0, lane::AUXILIARY)).map_err(|e| e.to_string())?;
            let eigs = hamiltonian_eigenvalues(&h).map_err(|e| e.to_string())?;
            stats.push(&SpectrumSample::new(eigs, 0.0, "control", k), n).map_err(|e| e.to_string())?;
        }
        let c = chi_square(&stats.spacing, 0..stats.spacing.bins(), |x| wigner_surmise_cdf(x, class));
        Ok(c.map_err(|e| e.to_string())?.p_value)
    };
    let n = a.dimension();
    let cg = control(HamiltonianEnsembleSpec::Goe { n }, SymmetryClass::Goe)?;
    let cu = control(HamiltonianEnsembleSpec::Gue { n }, SymmetryClass::Gue)?;
    Ok((
        ok,
        format!(
            "Nt=0.01: p_GOE={:.1e} p_GUE={:.1e}; Nt=10: p_GUE={:.3} p_GOE={:.1e}; \
             control, {} bare Hamiltonians: GOE vs GOE surmise p={cg:.1e}, GUE vs GUE surmise p={cu:.3}",
            eg.p_value, eu.p_value, lu.p_value, lg.p_value, a.realizations_completed
        ),
    ))
}

fn c6(a: &RunArtifact) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (v, class) in [(0.01, SymmetryClass::Goe), (10.0, SymmetryClass::Gue)] {
        let table = at(a, v).statistics.number_variance.table();
        for l in [1.0, 2.0, 5.0, 10.0] {
            let got = table.iter().find(|(x, _)| *x == l).and_then(|(_, s)| *s);
            let Some(got) = got else {
                return Ok((false, format!("Nt={v}: no windows of length {l}")));
            };
            let want = number_variance_asymptotic(l, class);
            let dev = got / want - 1.0;
            ok &= dev.abs() <= 0.15;
            parts.push(format!("{v}/{l}: {got:.3} vs {want:.3} ({:+.1}%)", 100.0 * dev));
        }
    }
    Ok((ok, format!("Nt/l: {}", parts.join(", "))))
}

fn c7() -> Outcome {
    let started = Instant::now();
    let rep = short_time_check(&ShortTimeSettings::new(512)).map_err(|e| e.to_string())?;
    eprintln!("  short-time check in {:.0} s", started.elapsed().as_secs_f64());
    let z = |c: &rmtmix::short_time::VarianceCheck| c.z_score();
    let slope = rep.order.slope;
    let ok = rep.b_diagonal.within(5.0)
        && rep.b_off_diagonal.within(5.0)
        && rep.d_off_diagonal.within(5.0)
        && (slope - 4.0).abs() <= 0.3;
    let (db, dbs) = rep.d_block_estimate;
    Ok((
        ok,
        format!(
            "z(B_nn) = {:+.2}, z(B_nm) = {:+.2}, z(D_nm vs 1/2) = {:+.2} [D = {:.6}; per-ensemble se {:.1e} gives z = {:+.2}; \
             exact finite-N variance (N+1)/2N = {:.6}], slope = {slope:.4}",
            z(&rep.b_diagonal),
            z(&rep.b_off_diagonal),
            z(&rep.d_off_diagonal),
            rep.d_off_diagonal.estimate,
            dbs,
            (db - 0.5) / dbs,
            rep.d_exact_variance
        ),
    ))
}

fn c8(a: &RunArtifact) -> Outcome {
    let (e, es) = r(at(a, 0.01));
    let (l, ls) = r(at(a, 100.0));
    let mut ok = e < R_TILDE_GOE && (l - R_TILDE_GUE).abs() <= 0.015;
    let (mut parts, mut trace_n) = (Vec::new(), Vec::new());
    for t in &a.times {
        let p = mp(t, DensityScaling::Standardized)?.p_value;
        let pass = p > 0.01;
        ok &= pass == (t.time >= 20.0);
        parts.push(format!("t={}: {p:.1e}", t.time));
        trace_n.push(mp(t, DensityScaling::TraceN).map_or("n/a".into(), |c| format!("{:.1e}", c.p_value)));
    }
    Ok((
        ok,
        format!(
            "early {e:.4}±{es:.4} (< 0.5307), late {l:.4}±{ls:.4}; p_MP {} (lambda N scaling, not gated: {})",
            parts.join(", "),
            trace_n.join(", ")
        ),
    ))
}

fn c9(a: &RunArtifact) -> Outcome {
    let (e, es) = r(at(a, 0.01));
    let (l, ls) = r(at(a, 100.0));
    let p = mp(at(a, 100.0), DensityScaling::Standardized)?.p_value;
    let ok = (e - R_TILDE_GOE).abs() <= 0.015 && (l - R_TILDE_GUE).abs() <= 0.015 && p < 1e-3;
    Ok((ok, format!("early {e:.4}±{es:.4}, late {l:.4}±{ls:.4}, p_MP(t=100) = {p:.1e}")))
}

fn c10(a: &RunArtifact) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in &a.times {
        let (m, s) = r(t);
        ok &= (m - R_TILDE_GUE).abs() <= 0.01;
        parts.push(format!("Nt={}: {m:.4}±{s:.4}", t.grid_value));
    }
    let magnon = [4, 16, 64, 256].into_iter().map(common::magnon_dispersion_error).fold(0.0, f64::max);
    ok &= magnon <= 1e-10;
    Ok((ok, format!("GUE {}; magnon max error {magnon:.1e}", parts.join(", "))))
}

fn c11(all: &[&RunArtifact]) -> Outcome {
    let mut ok = true;
    let (mut herm, mut trace, mut min_eig, mut count) = (0.0f64, 0.0f64, f64::INFINITY, 0u64);
    let (mut spacing_dev, mut worst) = (0.0f64, String::new());
    for a in all {
        for t in &a.times {
            let d = &t.diagnostics;
            ok &= d.density_matrices == a.realizations_completed;
            herm = herm.max(d.max_hermiticity_error);
            trace = trace.max(d.max_trace_error);
            min_eig = min_eig.min(d.min_eigenvalue);
            count += d.density_matrices;
            if t.statistics.unfolded_spectra > 0 {
                let dev = (t.statistics.mean_unfolded_spacing() - 1.0).abs();
                if dev > spacing_dev {
                    spacing_dev = dev;
                    worst = format!("{} N={} at grid value {}", a.config.kind().as_str(), a.dimension(), t.grid_value);
                }
            }
        }
    }
    ok &= herm <= 1e-10 && trace <= 1e-10 && min_eig >= -1e-10 && spacing_dev <= 0.02;

    let h = sample_goe(300, &RngStream::for_member(2024, 0, 0, lane::AUXILIARY)).map_err(|e| e.to_string())?;
    let eigs = decompose_real(&h).map_err(|e| e.to_string())?.eigenvalues().to_vec();
    let base = r_tilde_mean(&eigs).map_err(|e| e.to_string())?.mean;
    let shifted = |a: f64, b: f64| -> Result<f64, String> {
        let mut moved: Vec<f64> = eigs.iter().map(|x| a * x + b).collect();
        moved.sort_by(f64::total_cmp);
        Ok((r_tilde_mean(&moved).map_err(|e| e.to_string())?.mean - base).abs())
    };
    // Power-of-two scalings are exact in binary, so r~ must not move at all;
    // general maps round each level and may move it by rounding only.
    let mut dyadic = 0.0f64;
    for (a, b) in [(4.0, 0.0), (0.125, 0.0), (2.0, 0.0)] {
        dyadic = dyadic.max(shifted(a, b)?);
    }
    let mut affine = 0.0f64;
    for (a, b) in [(3.7, -1.2), (1e-3, 50.0), (2.0, 0.5)] {
        affine = affine.max(shifted(a, b)?);
    }
    ok &= dyadic == 0.0 && affine <= 1e-10;

    let oracle = (2..=8).map(|n| common::oracle_max_error(n, 2024 + n as u64)).fold(0.0, f64::max);
    ok &= oracle <= 1e-9;

    let small = goe(64, 8, "values = [0.01, 1.0, 10.0]");
    let cfg = ExperimentConfig::from_toml_str(&small).map_err(|e| e.to_string())?;
    let w = |k| run_experiment(&cfg, &RunOptions { workers: Some(k), ..Default::default() }).map_err(|e| e.to_string());
    let (a1, a3) = (w(1)?, w(3)?);
    let mut det = 0.0f64;
    for (x, y) in a1.times.iter().zip(&a3.times) {
        let (sx, sy) = (&x.statistics, &y.statistics);
        det = det.max((sx.ratio.mean() - sy.ratio.mean()).abs());
        for (p, q) in sx.spacing.density().iter().zip(sy.spacing.density()) {
            det = det.max((p - q).abs());
        }
        for ((_, p), (_, q)) in sx.number_variance.table().iter().zip(sy.number_variance.table()) {
            det = det.max((p.unwrap_or(0.0) - q.unwrap_or(0.0)).abs());
        }
    }
    ok &= det <= 1e-12;
    Ok((
        ok,
        format!(
            "{count} density matrices: max |rho - rho^dag| {herm:.1e}, max |tr - 1| {trace:.1e}, min eigenvalue {min_eig:.1e}; \
             unfolded spacing max dev {:.2}% ({worst}); affine dyadic {dyadic:.1e}, general {affine:.1e}; oracle n<=8 {oracle:.1e}; workers 1 vs 3 {det:.1e}",
            100.0 * spacing_dev
        ),
    ))
}

fn main() {
    let started = Instant::now();
    eprintln!("acceptance: running desk-scale experiments (tens of minutes on one core)");
    let lines: Vec<(usize, &str, Outcome)> = {
        let main = run(&goe(256, 680, "values = [0.01, 1.0, 10.0]"));
        let grid = "start = 0.03\nstop = 30.0\ncount = 13";
        let sweep: Result<Vec<(usize, RunArtifact)>, String> = [(128, 400), (256, 200), (512, 48)]
            .into_iter()
            .map(|(n, m)| run(&goe(n, m, grid)).map(|a| (n, a)))
            .collect();
        let hf = run(
            "[experiment]\nkind = \"spin-hf\"\nrealizations = 50\n[system]\nchain_length = 10\ndisorder = 0.5\n\
             [time_grid]\nvalues = [0.01, 0.1, 1.0, 5.0, 10.0, 20.0, 50.0, 100.0]\n[evolution]\nmethod = \"exact\"\n",
        );
        let oe = run(
            "[experiment]\nkind = \"spin-oe\"\nrealizations = 50\n[system]\nchain_length = 256\ndisorder = 0.1\n\
             [time_grid]\nvalues = [0.01, 0.1, 1.0, 10.0, 100.0]\n",
        );
        let gue = run(
            "[experiment]\nkind = \"gue-mix\"\nrealizations = 300\n[system]\ndimension = 128\n\
             [time_grid]\nvalues = [0.01, 1.0, 10.0]\n",
        );
        let with = |r: &Result<RunArtifact, String>, f: &dyn Fn(&RunArtifact) -> Outcome| match r {
            Ok(a) => f(a),
            Err(e) => Err(e.clone()),
        };
        let everything: Result<Vec<&RunArtifact>, String> = [&main, &hf, &oe, &gue]
            .into_iter()
            .map(|r| r.as_ref().map_err(String::clone))
            .chain(sweep.iter().flat_map(|s| s.iter().map(|(_, a)| Ok(a))))
            .collect();
        vec![
            (1, "GOE plateau values", with(&main, &c1)),
            (2, "crossover location", sweep.clone().and_then(|s| c2(&s))),
            (3, "crossover-curve fit", sweep.clone().and_then(|s| c3(&s[1].1))),
            (4, "Marchenko-Pastur and quarter circle", with(&main, &c4)),
            (5, "spacing-distribution crossover", with(&main, &c5)),
            (6, "number variance", with(&main, &c6)),
            (7, "short-time theory", c7()),
            (8, "spin HF qualitative curve", with(&hf, &c8)),
            (9, "spin OE contrast", with(&oe, &c9)),
            (10, "control experiments", with(&gue, &c10)),
            (11, "property suite", everything.and_then(|all| c11(&all))),
        ]
    };
    let mut passed = 0;
    for (id, name, outcome) in &lines {
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (*ok, d.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        passed += ok as usize;
        println!("criterion {id:>2} {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!(
        "acceptance: {passed}/{} criteria passed in {:.0} s",
        lines.len(),
        started.elapsed().as_secs_f64()
    );
    if lines.len() != 11 {
        std::process::exit(1);
    }
}
