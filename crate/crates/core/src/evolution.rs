//! Unitary propagation of a pure state and the incoherent mixture
//! `rho(t) = (1/N) sum_l |psi_l(t)><psi_l(t)|`, with `hbar = 1`.
//!
//! Every propagator is a [`PhaseRotation`]: a basis `B`, energies `E` and
//! weights `w` with `psi(t) = B (exp(-i E t) * w)`. Exact diagonalization
//! gives `B = V` and `w = V^dag psi0`. The Krylov route builds the Lanczos
//! basis of `psi0`, diagonalizes the projected tridiagonal matrix once and
//! uses the same phase-rotation evaluation; it is accepted only when its
//! a-posteriori error estimate is below tolerance over the whole time grid.

use std::ops::{Add, Mul, Sub};

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::ensembles::{Hamiltonian, HermitianMatrix, PureState, RealSymmetricMatrix};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub enum Eigenvectors {
    Real(Mat<f64>),
    Complex(Mat<Complex64>),
}

/// Eigenvalues in ascending order; column `k` of the eigenvector matrix
/// belongs to eigenvalue `k`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Eigenvectors,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Eigenvectors {
        &self.eigenvectors
    }

    fn vector_entry(&self, i: usize, k: usize) -> Complex64 {
        match &self.eigenvectors {
            Eigenvectors::Real(v) => Complex64::new(v[(i, k)], 0.0),
            Eigenvectors::Complex(v) => v[(i, k)],
        }
    }

    /// `max |H - V diag(E) V^dag|` over all elements.
    pub fn reconstruction_error(&self, h: &HermitianMatrix) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.vector_entry(i, k) * self.eigenvalues[k] * self.vector_entry(j, k).conj();
                }
                worst = worst.max((acc - h.get(i, j)).norm());
            }
        }
        worst
    }

    /// `max |V^dag V - 1|` over all elements.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut acc = ZERO;
                for i in 0..n {
                    acc += self.vector_entry(i, a).conj() * self.vector_entry(i, b);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Phase-rotation form of `exp(-iHt) psi0`.
    pub fn propagator(&self, psi0: &PureState) -> Result<PhaseRotation> {
        let n = self.dim();
        if psi0.dim() != n {
            return Err(Error::Shape(format!(
                "state of dimension {} for a {n}x{n} Hamiltonian",
                psi0.dim()
            )));
        }
        let amps = psi0.amplitudes();
        let weights = (0..n)
            .map(|k| (0..n).map(|i| self.vector_entry(i, k).conj() * amps[i]).sum())
            .collect();
        let basis = match &self.eigenvectors {
            Eigenvectors::Real(v) => Basis::Real(v.clone()),
            Eigenvectors::Complex(v) => Basis::Complex(v.clone()),
        };
        Ok(PhaseRotation {
            basis,
            energies: self.eigenvalues.clone(),
            weights,
        })
    }
}

fn evd_error(dim: usize, kind: &'static str) -> Error {
    Error::Diagonalization { dim, kind }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn decompose(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let evd = h
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| evd_error(n, "complex Hermitian"))?;
    let eigenvalues = (0..n).map(|k| evd.S()[k].re).collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: Eigenvectors::Complex(evd.U().to_owned()),
    })
}

/// Full eigendecomposition of a real symmetric matrix, keeping real vectors.
pub fn decompose_real(h: &RealSymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let evd = h
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| evd_error(n, "real symmetric"))?;
    let eigenvalues = (0..n).map(|k| evd.S()[k]).collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: Eigenvectors::Real(evd.U().to_owned()),
    })
}

pub fn decompose_hamiltonian(h: &Hamiltonian) -> Result<SpectralDecomposition> {
    match h {
        Hamiltonian::Real(h) => decompose_real(h),
        Hamiltonian::Complex(h) => decompose(h),
    }
}

/// Eigenvalues only, ascending.
pub fn hamiltonian_eigenvalues(h: &Hamiltonian) -> Result<Vec<f64>> {
    match h {
        Hamiltonian::Real(m) => m
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| evd_error(m.dim(), "real symmetric")),
        Hamiltonian::Complex(m) => m
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| evd_error(m.dim(), "complex Hermitian")),
    }
}

#[derive(Clone, Debug)]
enum Basis {
    Real(Mat<f64>),
    Complex(Mat<Complex64>),
}

/// `psi(t) = B (exp(-i E t) * w)`.
#[derive(Clone, Debug)]
pub struct PhaseRotation {
    basis: Basis,
    energies: Vec<f64>,
    weights: Vec<Complex64>,
}

impl PhaseRotation {
    pub fn dim(&self) -> usize {
        match &self.basis {
            Basis::Real(b) => b.nrows(),
            Basis::Complex(b) => b.nrows(),
        }
    }

    /// Number of basis columns: `N` for exact propagation, the Krylov
    /// dimension otherwise.
    pub fn rank(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Writes `psi(t)` into `out`. Columns are accumulated in a fixed order,
    /// so the result depends only on `t`, never on which other times are
    /// evaluated alongside it.
    pub fn write_state(&self, t: f64, out: &mut [Complex64]) {
        let n = self.dim();
        assert_eq!(out.len(), n);
        out.fill(ZERO);
        match &self.basis {
            Basis::Real(b) => {
                let mut re = vec![0.0; n];
                let mut im = vec![0.0; n];
                for (k, (&e, &w)) in self.energies.iter().zip(&self.weights).enumerate() {
                    let z = Complex64::from_polar(1.0, -e * t) * w;
                    let col = b.col(k);
                    for i in 0..n {
                        re[i] += col[i] * z.re;
                        im[i] += col[i] * z.im;
                    }
                }
                for i in 0..n {
                    out[i] = Complex64::new(re[i], im[i]);
                }
            }
            Basis::Complex(b) => {
                for (k, (&e, &w)) in self.energies.iter().zip(&self.weights).enumerate() {
                    let z = Complex64::from_polar(1.0, -e * t) * w;
                    let col = b.col(k);
                    for i in 0..n {
                        out[i] += col[i] * z;
                    }
                }
            }
        }
    }

    pub fn state(&self, t: f64) -> PureState {
        let mut out = vec![ZERO; self.dim()];
        self.write_state(t, &mut out);
        PureState::from_vec_unchecked(out)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// `exp(-iHt) psi0` through the eigenbasis of `H`.
pub fn propagate(d: &SpectralDecomposition, psi0: &PureState, t: f64) -> Result<PureState> {
    check_time(t)?;
    Ok(d.propagator(psi0)?.state(t))
}

/// [`propagate`] over a whole time grid, projecting `psi0` only once.
pub fn propagate_grid(
    d: &SpectralDecomposition,
    psi0: &PureState,
    times: &[f64],
) -> Result<Vec<PureState>> {
    for &t in times {
        check_time(t)?;
    }
    let p = d.propagator(psi0)?;
    Ok(times.iter().map(|&t| p.state(t)).collect())
}

/// Scalar operations needed by the Lanczos recursion.
trait Field: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    const ZERO: Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Field for f64 {
    const ZERO: Self = 0.0;
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Field for Complex64 {
    const ZERO: Self = ZERO;
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Tuning for the Krylov propagator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Bound on the estimated 2-norm error of `psi(t)` over the grid.
    pub tolerance: f64,
    /// Largest Krylov dimension tried before giving up.
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_dim: 96,
        }
    }
}

fn matvec<T: Field>(h: MatRef<'_, T>, x: &[T], y: &mut [T]) {
    y.fill(T::ZERO);
    for (j, &xj) in x.iter().enumerate() {
        let col = h.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = *yi + col[i] * xj;
        }
    }
}

fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::ZERO, |acc, (&x, &y)| acc + x.conj() * y)
}

/// Lanczos with full reorthogonalization. Returns `None` if the error
/// estimate has not dropped below tolerance by `max_dim` vectors.
fn lanczos<T: Field>(
    h: MatRef<'_, T>,
    psi0: &[T],
    times: &[f64],
    opts: KrylovOptions,
) -> Option<PhaseRotation> {
    let n = h.nrows();
    let max_dim = opts.max_dim.min(n).max(1);
    let norm0 = psi0.iter().map(|x| x.abs2()).sum::<f64>().sqrt();
    let mut q: Vec<Vec<T>> = vec![psi0.iter().map(|&x| x * T::from_re(1.0 / norm0)).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![T::ZERO; n];
    let scale = h_norm_estimate(h);

    loop {
        let j = q.len() - 1;
        matvec(h, &q[j], &mut w);
        let a = dot(&q[j], &w).to_complex().re;
        alpha.push(a);
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                for (wk, &qk) in w.iter_mut().zip(qi) {
                    *wk = *wk - qk * c;
                }
            }
        }
        let b = w.iter().map(|x| x.abs2()).sum::<f64>().sqrt();
        let k = q.len();
        let (theta, vecs) = tridiagonal_eigen(&alpha, &beta);
        let exhausted = b <= 1e-13 * scale.max(1.0) || k == n;
        let err = if exhausted {
            0.0
        } else {
            times
                .iter()
                .map(|&t| {
                    let last: Complex64 = (0..k)
                        .map(|m| Complex64::from_polar(vecs[(0, m)], -theta[m] * t) * vecs[(k - 1, m)])
                        .sum();
                    b * last.norm()
                })
                .fold(0.0, f64::max)
        };
        if exhausted || err < opts.tolerance {
            let mut basis = Mat::<Complex64>::zeros(n, k);
            let mut real_basis = Mat::<f64>::zeros(n, k);
            let is_real = std::mem::size_of::<T>() == std::mem::size_of::<f64>();
            for m in 0..k {
                for i in 0..n {
                    let mut acc = ZERO;
                    for (r, qr) in q.iter().enumerate() {
                        acc += qr[i].to_complex() * vecs[(r, m)];
                    }
                    if is_real {
                        real_basis[(i, m)] = acc.re;
                    } else {
                        basis[(i, m)] = acc;
                    }
                }
            }
            let weights = (0..k).map(|m| Complex64::new(vecs[(0, m)] * norm0, 0.0)).collect();
            return Some(PhaseRotation {
                basis: if is_real { Basis::Real(real_basis) } else { Basis::Complex(basis) },
                energies: theta,
                weights,
            });
        }
        if k >= max_dim {
            return None;
        }
        beta.push(b);
        q.push(w.iter().map(|&x| x * T::from_re(1.0 / b)).collect());
    }
}

fn h_norm_estimate<T: Field>(h: MatRef<'_, T>) -> f64 {
    (0..h.ncols())
        .map(|j| h.col(j).iter().map(|x| x.abs2()).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Mat<f64>) {
    let k = alpha.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .expect("small tridiagonal eigenproblem converges");
    ((0..k).map(|m| evd.S()[m]).collect(), evd.U().to_owned())
}

/// Krylov propagator valid on `times`; `None` when it would need more than
/// `opts.max_dim` vectors.
pub fn krylov_propagator(
    h: &Hamiltonian,
    psi0: &PureState,
    times: &[f64],
    opts: KrylovOptions,
) -> Result<Option<PhaseRotation>> {
    if psi0.dim() != h.dim() {
        return Err(Error::Shape(format!(
            "state of dimension {} for a {1}x{1} Hamiltonian",
            psi0.dim(),
            h.dim()
        )));
    }
    let real_state = psi0.amplitudes().iter().all(|z| z.im == 0.0);
    Ok(match h {
        Hamiltonian::Real(m) if real_state => {
            let v: Vec<f64> = psi0.amplitudes().iter().map(|z| z.re).collect();
            lanczos(m.as_ref(), &v, times, opts)
        }
        _ => {
            let hc = h.to_hermitian();
            lanczos(hc.as_ref(), psi0.amplitudes(), times, opts)
        }
    })
}

/// Gershgorin bound on the spectral radius.
pub fn spectral_radius_bound(h: &Hamiltonian) -> f64 {
    let n = h.dim();
    (0..n)
        .map(|i| match h {
            Hamiltonian::Real(m) => (0..n).map(|j| m.get(i, j).abs()).sum::<f64>(),
            Hamiltonian::Complex(m) => (0..n).map(|j| m.get(i, j).norm()).sum::<f64>(),
        })
        .fold(0.0, f64::max)
}

/// How each ensemble member is propagated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PropagationMethod {
    /// Full diagonalization of every member.
    Exact,
    /// Lanczos basis of the initial state; errors if it does not converge.
    Krylov,
    /// Krylov when `max|t| * ||H||_gershgorin <= 30`, falling back to exact
    /// diagonalization when it does not converge.
    #[default]
    Auto,
}

/// Propagator for one member according to `method`.
pub fn build_propagator(
    h: &Hamiltonian,
    psi0: &PureState,
    times: &[f64],
    method: PropagationMethod,
    opts: KrylovOptions,
) -> Result<PhaseRotation> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let try_krylov = match method {
        PropagationMethod::Exact => false,
        PropagationMethod::Krylov => true,
        PropagationMethod::Auto => t_max * spectral_radius_bound(h) <= 30.0,
    };
    if try_krylov {
        if let Some(p) = krylov_propagator(h, psi0, times, opts)? {
            return Ok(p);
        }
        if method == PropagationMethod::Krylov {
            return Err(Error::Config(format!(
                "Krylov propagation did not converge within {} vectors",
                opts.max_dim
            )));
        }
    }
    decompose_hamiltonian(h)?.propagator(psi0)
}

/// Hermitian, unit-trace, positive semidefinite state at a given time.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    entries: Mat<Complex64>,
    time: f64,
}

/// Numerical health of a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn holds(&self) -> bool {
        self.hermiticity_error <= Self::TOLERANCE
            && self.trace_error <= Self::TOLERANCE
            && self.min_eigenvalue >= -Self::TOLERANCE
    }
}

impl DensityMatrix {
    /// `|psi><psi|`.
    pub fn pure(psi: &PureState, time: f64) -> Self {
        let a = psi.amplitudes();
        let n = a.len();
        Self {
            entries: Mat::from_fn(n, n, |i, j| a[i] * a[j].conj()),
            time,
        }
    }

    /// Validates Hermiticity, trace and positivity (tolerance `1e-10`).
    pub fn from_entries(entries: Mat<Complex64>, time: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        let rho = Self { entries, time };
        let report = rho.invariants()?;
        if !report.holds() {
            return Err(Error::Precondition(format!("not a density matrix: {report:?}")));
        }
        Ok(rho)
    }

    /// No validation; for callers that construct Hermitian unit-trace
    /// matrices by design.
    pub(crate) fn from_entries_unchecked(entries: Mat<Complex64>, time: f64) -> Self {
        Self { entries, time }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn entries(&self) -> MatRef<'_, Complex64> {
        self.entries.as_ref()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.entries
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| evd_error(self.dim(), "density"))
    }

    pub fn invariants(&self) -> Result<InvariantReport> {
        let eigs = self.eigenvalues()?;
        Ok(self.invariants_with(&eigs))
    }

    /// Same as [`Self::invariants`] with precomputed eigenvalues.
    pub fn invariants_with(&self, eigenvalues: &[f64]) -> InvariantReport {
        InvariantReport {
            hermiticity_error: crate::ensembles::hermiticity_error(self.entries.as_ref()),
            trace_error: (self.trace() - 1.0).norm(),
            min_eigenvalue: eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// `Some(k)` if this is exactly `|k><k|`.
    pub fn basis_projector_index(&self) -> Option<usize> {
        let n = self.dim();
        let mut found = None;
        for j in 0..n {
            for i in 0..n {
                let z = self.entries[(i, j)];
                if i == j && z == Complex64::new(1.0, 0.0) && found.is_none() {
                    found = Some(i);
                } else if z != ZERO {
                    return None;
                }
            }
        }
        found
    }
}

/// `tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.entries();
    let n = m.nrows();
    (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)].norm_sqr()).sum::<f64>())
        .sum()
}

/// Guard on the ensemble size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MixingOptions {
    /// Permit an ensemble whose size differs from the Hilbert dimension.
    /// Results produced this way fall outside the standard setup.
    pub allow_size_mismatch: bool,
}

fn check_ensemble_size(members: usize, dim: usize, opts: MixingOptions) -> Result<()> {
    if members == 0 {
        return Err(Error::Config("empty Hamiltonian ensemble".into()));
    }
    if members != dim && !opts.allow_size_mismatch {
        return Err(Error::Config(format!(
            "ensemble has {members} members but the Hilbert dimension is {dim}; \
             the mixture requires one Hamiltonian per dimension"
        )));
    }
    Ok(())
}

/// `(1/K) Psi Psi^dag` from the `K` member states stored as columns, then
/// replaced by its Hermitian part.
pub fn assemble_density(states: MatRef<'_, Complex64>, time: f64) -> DensityMatrix {
    let k = states.ncols() as f64;
    let product = states * states.adjoint();
    let n = product.nrows();
    let entries = Mat::from_fn(n, n, |i, j| (product[(i, j)] + product[(j, i)].conj()) * (0.5 / k));
    DensityMatrix { entries, time }
}

/// Mixed state of one ensemble at time `t`.
pub fn mixed_state(
    ensemble: &[SpectralDecomposition],
    psi0: &PureState,
    t: f64,
) -> Result<DensityMatrix> {
    mixed_state_with(ensemble, psi0, t, MixingOptions::default())
}

pub fn mixed_state_with(
    ensemble: &[SpectralDecomposition],
    psi0: &PureState,
    t: f64,
    opts: MixingOptions,
) -> Result<DensityMatrix> {
    check_ensemble_size(ensemble.len(), psi0.dim(), opts)?;
    let propagators = ensemble
        .iter()
        .map(|d| d.propagator(psi0))
        .collect::<Result<Vec<_>>>()?;
    Ok(mixed_states(&propagators, &[t], opts)?.pop().expect("one time"))
}

/// Mixed states on a time grid from prepared propagators.
pub fn mixed_states(
    members: &[PhaseRotation],
    times: &[f64],
    opts: MixingOptions,
) -> Result<Vec<DensityMatrix>> {
    let n = members.first().map(PhaseRotation::dim).unwrap_or(0);
    check_ensemble_size(members.len(), n, opts)?;
    if members.iter().any(|m| m.dim() != n) {
        return Err(Error::Shape("ensemble members have different dimensions".into()));
    }
    times
        .iter()
        .map(|&t| {
            check_time(t)?;
            let mut psi = Mat::<Complex64>::zeros(n, members.len());
            let mut col = vec![ZERO; n];
            for (l, m) in members.iter().enumerate() {
                m.write_state(t, &mut col);
                for i in 0..n {
                    psi[(i, l)] = col[i];
                }
            }
            Ok(assemble_density(psi.as_ref(), t))
        })
        .collect()
}

/// One realization's worth of mixing: ensemble, initial state, time grid.
#[derive(Clone, Debug)]
pub struct MixingJob {
    pub ensemble: crate::ensembles::HamiltonianEnsembleSpec,
    pub initial_state: PureState,
    pub times: Vec<f64>,
    pub realization: u64,
}

impl MixingJob {
    pub fn new(
        ensemble: crate::ensembles::HamiltonianEnsembleSpec,
        initial_state: PureState,
        times: Vec<f64>,
        realization: u64,
    ) -> Result<Self> {
        validate_time_grid(&times)?;
        if initial_state.dim() != ensemble.dimension() {
            return Err(Error::Shape(format!(
                "initial state has dimension {} but the ensemble has {}",
                initial_state.dim(),
                ensemble.dimension()
            )));
        }
        Ok(Self {
            ensemble,
            initial_state,
            times,
            realization,
        })
    }
}

/// Times must be finite, nonnegative and strictly increasing.
pub fn validate_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("time grid is empty".into()));
    }
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("time grid must be strictly increasing".into()));
    }
    Ok(())
}
