//! The `rmtmix` binary: subcommands, artifact layout, exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "[experiment]\nkind = \"goe-mix\"\nrealizations = 4\nseed = 5\n\
[system]\ndimension = 24\n[time_grid]\nvalues = [0.01, 1.0, 10.0]\n\
[spectra]\nunfolding_degree = 3\nsigma2_lengths = [1.0, 2.0]\n";

fn rmtmix(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rmtmix"));
    cmd.args(args).env_remove("RMTMIX_WORKERS");
    if let Some(w) = workers {
        cmd.env("RMTMIX_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_the_artifact_layout_and_emits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("run");
    let o = rmtmix(&["run", &cfg, "--output", out.to_str().unwrap()], Some("1"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.snapshot", "summary.txt", "stats/time_0.tsv", "stats/time_2.tsv", "fits.tsv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("complete = true"));
    assert!(summary.contains("dimension_times_realizations = 96"));

    let plots = dir.path().join("plots");
    let o = rmtmix(
        &["emit", out.to_str().unwrap(), "--figure", "fig1c", "--output", plots.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(plots.join("fig1c.tsv")).unwrap();
    assert!(table.contains("goe_surmise\tgue_surmise"));
    let o = rmtmix(&["emit", out.to_str().unwrap(), "--figure", "fig9"], None);
    assert_eq!(code(&o), 2);
}

#[test]
fn worker_count_does_not_change_the_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let mut stats = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(format!("w{w}"));
        let o = rmtmix(&["run", &cfg, "--output", out.to_str().unwrap()], Some(w));
        assert_eq!(code(&o), 0);
        stats.push(fs::read_to_string(out.join("stats/time_1.tsv")).unwrap());
    }
    assert_eq!(stats[0], stats[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", SMALL);
    let bad = write(dir.path(), "bad.toml", "[experiment]\nkind = \"goe-mix\"\nrealizations = 0\n[system]\ndimension = 8\n");
    let huge = write(
        dir.path(),
        "huge.toml",
        "[experiment]\nkind = \"goe-mix\"\nrealizations = 1000\n[system]\ndimension = 2048\n",
    );
    assert_eq!(code(&rmtmix(&["run", &bad], None)), 2);
    assert_eq!(code(&rmtmix(&["run", "/does/not/exist.toml"], None)), 2);
    assert_eq!(code(&rmtmix(&["run", &huge], Some("1"))), 3);
    assert_eq!(code(&rmtmix(&["estimate", &good], Some("zero"))), 2);
    assert_eq!(code(&rmtmix(&["bogus-subcommand"], None)), 2);

    let o = rmtmix(&["estimate", &huge], Some("1"));
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("within_budget = false"));
}

#[test]
fn presets_and_short_time_check() {
    let o = rmtmix(&["presets", "list"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["goe-desk", "goe-paper", "spin-hf-paper", "spin-oe-paper", "short-time-512"] {
        assert!(text.contains(name), "{name} missing");
    }
    let o = rmtmix(&["presets", "show", "spin-hf-desk"], None);
    assert!(String::from_utf8_lossy(&o.stdout).contains("chain_length = 10"));
    assert_eq!(code(&rmtmix(&["presets", "show", "nope"], None)), 2);

    let o = rmtmix(&["short-time-check", "--n", "16", "--ensembles", "10"], Some("1"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("short_time.order.slope"));
}
