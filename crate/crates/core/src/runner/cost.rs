//! Up-front resource estimates.
//!
//! The work of a mixing run is `M N (c_member + c_prop T N^2)` flops:
//! every one of the `N` members of each of the `M` realizations is
//! propagated once (`c_member`), and each time point costs the state
//! write-out, the `Psi Psi^dag` product and the eigenvalues of `rho`
//! (`c_prop N^2` per member). Constants, for real Hamiltonians:
//!
//! * exact diagonalization with vectors: `c_member = 9 N^3`;
//! * Krylov with `k` vectors: `c_member = k (2 N^2 + 4 k N)`, where
//!   `k = min(96, 1.5 t_max R + 16)` and `R` is the Gershgorin bound of a
//!   sampled member;
//! * `c_prop = 8 r / N + 14` with `r` the propagator rank (`k` or `N`):
//!   state write-out `8 r N`, product `8 N^2` and Hermitian eigenvalues
//!   `~16/3 N^2` per member and time.
//!
//! Complex Hamiltonians multiply `c_member` by 4. Memory per worker is
//! `(T + 5) N^2` complex numbers (states for every time, `H`, eigenvectors,
//! `rho` and eigensolver workspace). Wall time assumes [`FLOP_RATE`] per
//! worker, calibrated on a single core of the development machine.

use crate::ensembles::HamiltonianSource;
use crate::error::Result;
use crate::evolution::{spectral_radius_bound, PropagationMethod};
use crate::rng::{lane, RngStream};

use super::config::{ExperimentConfig, ExperimentKind};

/// Sustained flops per second per worker assumed for wall-time guesses.
pub const FLOP_RATE: f64 = 5e9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    pub flops: f64,
    pub memory_bytes: f64,
    pub wall_seconds: f64,
    pub workers: usize,
    /// Whether members are expected to use the Krylov propagator.
    pub krylov: bool,
}

pub fn estimate_cost(config: &ExperimentConfig) -> Result<CostEstimate> {
    let workers = config.workers()?;
    let n = config.dimension()? as f64;
    if config.kind() == ExperimentKind::ShortTimeCheck {
        let st = &config.short_time;
        let ensembles = st.ensembles as f64;
        // Sampling and the outer-product accumulations are ~20 flops per
        // element per member; the order check diagonalizes small ensembles.
        let d = st.order_dimension as f64;
        let flops = ensembles * n * 20.0 * n * n + st.order_points as f64 * d * 9.0 * d * d * d;
        let memory = 6.0 * 8.0 * n * n * workers as f64;
        return Ok(CostEstimate {
            flops,
            memory_bytes: memory,
            wall_seconds: flops / (FLOP_RATE * workers as f64),
            workers,
            krylov: false,
        });
    }

    let m = config.realizations()? as f64;
    let times = config.times()?;
    let t_count = times.len() as f64;
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let spec = config.ensemble_spec()?;
    let complex = !spec.is_real();
    let source = HamiltonianSource::new(spec)?;
    let h = source.sample(&RngStream::for_member(config.experiment.seed, 0, 0, lane::HAMILTONIAN))?;
    let radius = spectral_radius_bound(&h);

    let method: PropagationMethod = config.evolution.method.into();
    let krylov = match method {
        PropagationMethod::Exact => false,
        PropagationMethod::Krylov => true,
        PropagationMethod::Auto => t_max * radius <= 30.0,
    };
    let (member, rank) = if krylov {
        let k = (1.5 * t_max * radius + 16.0).min(96.0).min(n);
        (k * (2.0 * n * n + 4.0 * k * n), k)
    } else {
        (9.0 * n * n * n, n)
    };
    let member = if complex { 4.0 * member } else { member };
    let c_prop = 8.0 * rank / n + 14.0;
    let flops = m * n * (member + c_prop * t_count * n * n);

    let held_times = if config.evolution.refresh_per_time { 1.0 } else { t_count };
    let memory = workers as f64 * (held_times + 5.0) * 16.0 * n * n;
    Ok(CostEstimate {
        flops,
        memory_bytes: memory,
        wall_seconds: flops / (FLOP_RATE * workers.min(m as usize).max(1) as f64),
        workers,
        krylov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goe(n: usize, m: u64, t: usize, method: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            "[experiment]\nkind = \"goe-mix\"\nrealizations = {m}\nworkers = 1\n\
             [system]\ndimension = {n}\n[time_grid]\ncount = {t}\n[evolution]\nmethod = \"{method}\"\n"
        ))
        .unwrap()
    }

    #[test]
    fn scale_and_growth() {
        let e = estimate_cost(&goe(256, 100, 20, "exact")).unwrap();
        assert!(e.flops > 1e11 && e.flops < 1e13, "{e:?}");
        let auto = estimate_cost(&goe(256, 100, 20, "auto")).unwrap();
        assert!(auto.krylov && auto.flops < e.flops);
        let big = estimate_cost(&goe(512, 100, 20, "exact")).unwrap();
        let ratio = big.flops / e.flops;
        assert!(ratio > 12.0 && ratio < 17.0, "{ratio}");
        let tiny = estimate_cost(&goe(2, 1, 1, "exact")).unwrap();
        assert!(tiny.flops > 0.0 && tiny.memory_bytes > 0.0 && tiny.wall_seconds > 0.0);
    }
}
