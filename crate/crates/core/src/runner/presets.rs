//! Named configurations.
//!
//! The `*-desk` presets run in minutes on a workstation; the `*-paper`
//! presets reproduce the published sizes and carry budgets large enough to
//! let them start. Realization counts of the GOE presets keep at least
//! `10^5` pooled bulk eigenvalues: `M = ceil(10^5 / (0.6 N))` plus a 4%
//! margin for the levels lost to trace truncation at early times. The paper
//! preset uses `M = round(5e5 / N)`.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

impl Preset {
    pub fn config(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(self.toml)
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "goe-desk",
        description: "GOE mixing at N = 256 over N t in [0.01, 10]",
        toml: r#"[experiment]
kind = "goe-mix"
name = "goe-desk"
realizations = 680

[system]
dimension = 256

[time_grid]
count = 19
"#,
    },
    Preset {
        name: "goe-paper",
        description: "GOE mixing at N = 1024, M = 488 (N M ~ 5e5)",
        toml: r#"[experiment]
kind = "goe-mix"
name = "goe-paper"
realizations = 488

[system]
dimension = 1024

[time_grid]
count = 19

[budget]
max_flops = 1e17
max_memory_bytes = 8e9
"#,
    },
    Preset {
        name: "gue-control",
        description: "GUE mixing control at N = 128: GUE statistics at every time",
        toml: r#"[experiment]
kind = "gue-mix"
name = "gue-control"
realizations = 1303

[system]
dimension = 128

[time_grid]
count = 7
"#,
    },
    Preset {
        name: "crossover-desk",
        description: "GOE + i alpha A Hamiltonians (alpha = 0.1) at N = 128",
        toml: r#"[experiment]
kind = "crossover-hamiltonian"
name = "crossover-desk"
realizations = 400

[system]
dimension = 128
alpha = 0.1

[time_grid]
count = 7
"#,
    },
    Preset {
        name: "spin-hf-desk",
        description: "Disordered Heisenberg chain, half filling, L = 10, h = 0.5, M = 50",
        toml: r#"[experiment]
kind = "spin-hf"
name = "spin-hf-desk"
realizations = 50

[system]
chain_length = 10
disorder = 0.5

[time_grid]
count = 17

[evolution]
method = "exact"
"#,
    },
    Preset {
        name: "spin-hf-paper",
        description: "Half filling at L = 12 (N = 924), h = 0.5, M = 541",
        toml: r#"[experiment]
kind = "spin-hf"
name = "spin-hf-paper"
realizations = 541

[system]
chain_length = 12
disorder = 0.5

[time_grid]
count = 17

[evolution]
method = "exact"

[budget]
max_flops = 1e17
max_memory_bytes = 8e9
"#,
    },
    Preset {
        name: "spin-oe-desk",
        description: "One-excitation subspace, L = 256, h = 0.1, M = 50",
        toml: r#"[experiment]
kind = "spin-oe"
name = "spin-oe-desk"
realizations = 50

[system]
chain_length = 256
disorder = 0.1

[time_grid]
count = 17
"#,
    },
    Preset {
        name: "spin-oe-paper",
        description: "One-excitation subspace, L = 924, h = 0.1, M = 541",
        toml: r#"[experiment]
kind = "spin-oe"
name = "spin-oe-paper"
realizations = 541

[system]
chain_length = 924
disorder = 0.1

[time_grid]
count = 17

[budget]
max_flops = 1e17
max_memory_bytes = 8e9
"#,
    },
    Preset {
        name: "short-time-512",
        description: "Short-time variance and truncation-order check at N = 512, 200 ensembles",
        toml: r#"[experiment]
kind = "short-time-check"
name = "short-time-512"

[system]
dimension = 512

[short_time]
ensembles = 200
"#,
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::Config(format!("unknown preset {name:?}; known: {}", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::ExperimentKind;

    #[test]
    fn presets_parse_and_keep_paper_sizes() {
        for p in PRESETS {
            let c = p.config().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(c.experiment.name.as_deref(), Some(p.name));
        }
        let goe = find("goe-desk").unwrap().config().unwrap();
        let m = goe.realizations().unwrap();
        assert!(m as f64 * 0.6 * 256.0 >= 1.04e5);
        let paper = find("goe-paper").unwrap().config().unwrap();
        assert_eq!(paper.realizations().unwrap(), (5e5f64 / 1024.0).round() as u64);
        let hf = find("spin-hf-paper").unwrap().config().unwrap();
        assert_eq!((hf.dimension().unwrap(), hf.realizations().unwrap()), (924, 541));
        let oe = find("spin-oe-paper").unwrap().config().unwrap();
        assert_eq!((oe.dimension().unwrap(), oe.realizations().unwrap()), (924, 541));
        assert_eq!(find("short-time-512").unwrap().config().unwrap().kind(), ExperimentKind::ShortTimeCheck);
        assert!(find("nope").is_err());
    }
}
