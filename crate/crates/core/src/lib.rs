//! Random density matrices generated dynamically: a fixed pure state is
//! evolved by `N` independent random Hamiltonians, the projectors are
//! averaged, and the eigenvalue statistics of the mixture are followed
//! through the GOE to GUE crossover.
//!
//! * [`ensembles`]: GOE/GUE/crossover samplers, states, Hamiltonian families.
//! * [`evolution`]: propagation (exact and Krylov) and mixed-state assembly.
//! * [`short_time`]: the second-order expansion of the mixed state.
//! * [`spin_chain`]: disordered Heisenberg chains in fixed-magnetization sectors.
//! * [`spectra`]: truncation, ratios, unfolding, spacings, number variance.
//! * [`fitting`]: Levenberg–Marquardt fits of the crossover curve.
//! * [`runner`]: configs, cost estimates, parallel runs, artifacts, plot tables.

pub mod ensembles;
pub mod error;
pub mod evolution;
pub mod fitting;
pub mod gof;
pub mod rng;
pub mod runner;
pub mod short_time;
pub mod spectra;
pub mod spin_chain;

pub use error::{Error, Result};
