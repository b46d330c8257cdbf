//! Random-matrix and random-state samplers.
//!
//! Normalization follows the crossover-Hamiltonian convention used
//! throughout the crate: `<S_nn^2> = 2 <S_nm^2> = 2 <A_nm^2> = 1`, with no
//! `1/N` scaling of the matrix elements. Entries are drawn column by column
//! over the lower triangle (`j` outer, `i >= j` inner), which fixes the
//! mapping from a seed to a matrix.

use std::f64::consts::FRAC_1_SQRT_2;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spin_chain::{self, SubspaceBasis};

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Real symmetric matrix, symmetric bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymmetricMatrix(Mat<f64>);

impl RealSymmetricMatrix {
    /// Wraps `m`, rejecting anything that is not exactly symmetric.
    pub fn from_mat(m: Mat<f64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        for j in 0..m.ncols() {
            for i in (j + 1)..m.nrows() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Shape(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds a symmetric matrix from its lower triangle `f(i, j)`, `i >= j`.
    pub fn from_lower(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            let col = m.col_mut(j).try_as_col_major_mut().unwrap().as_slice_mut();
            for (i, x) in col.iter_mut().enumerate().skip(j) {
                *x = f(i, j);
            }
        }
        mirror_lower(&mut m, 1.0);
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(Mat::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> Mat<f64> {
        self.0
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        let n = self.dim();
        HermitianMatrix(Mat::from_fn(n, n, |i, j| Complex64::new(self.0[(i, j)], 0.0)))
    }
}

/// Real antisymmetric matrix with an exactly zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct RealAntisymmetricMatrix(Mat<f64>);

impl RealAntisymmetricMatrix {
    pub fn from_mat(m: Mat<f64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        for j in 0..m.ncols() {
            if m[(j, j)] != 0.0 {
                return Err(Error::Shape(format!("nonzero diagonal at {j}")));
            }
            for i in (j + 1)..m.nrows() {
                if m[(i, j)] != -m[(j, i)] {
                    return Err(Error::Shape(format!(
                        "matrix is not antisymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds the matrix from its strictly lower triangle `f(i, j)`, `i > j`.
    pub fn from_lower(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            for i in (j + 1)..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.0.as_ref()
    }
}

/// Complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(Mat<Complex64>);

impl HermitianMatrix {
    /// Wraps `m` if it is Hermitian to within `1e-12` per element.
    pub fn from_mat(m: Mat<Complex64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        let err = hermiticity_error(m.as_ref());
        if err > HERMITIAN_TOL {
            return Err(Error::Shape(format!(
                "matrix is not Hermitian (max |H - H^dag| = {err:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_ref(&self) -> MatRef<'_, Complex64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> Mat<Complex64> {
        self.0
    }

    /// `true` when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| self.0[(i, j)].im == 0.0))
    }
}

/// Largest elementwise deviation `|m - m^dag|`.
pub fn hermiticity_error(m: MatRef<'_, Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(Vec<Complex64>);

impl PureState {
    /// Accepts amplitudes whose squared norm is one to within `1e-12`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "a state needs at least one amplitude",
            });
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Precondition(format!(
                "state is not normalized (|psi|^2 = {norm2})"
            )));
        }
        Ok(Self(amplitudes))
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::Precondition("cannot normalize a zero state".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self(amplitudes))
    }

    pub(crate) fn from_vec_unchecked(amplitudes: Vec<Complex64>) -> Self {
        Self(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Index of the single nonzero amplitude, if this is a basis state.
    pub fn basis_index(&self) -> Option<usize> {
        let mut found = None;
        for (k, a) in self.0.iter().enumerate() {
            if *a != Complex64::new(0.0, 0.0) {
                if found.is_some() || (a.norm() - 1.0).abs() > NORM_TOL {
                    return None;
                }
                found = Some(k);
            }
        }
        found
    }
}

/// Copies the strict lower triangle onto the upper one times `sign`, in
/// cache-sized tiles.
fn mirror_lower(m: &mut Mat<f64>, sign: f64) {
    const TILE: usize = 32;
    let n = m.nrows();
    for jb in (0..n).step_by(TILE) {
        for ib in (jb..n).step_by(TILE) {
            for i in ib..(ib + TILE).min(n) {
                for j in jb..(jb + TILE).min(n).min(i) {
                    let v = m[(i, j)];
                    m[(j, i)] = sign * v;
                }
            }
        }
    }
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::Shape(format!("expected a square matrix, got {rows}x{cols}")));
    }
    Ok(())
}

fn require_matrix_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension {
            dim: n,
            reason: "random matrices need n >= 2",
        });
    }
    Ok(())
}

/// GOE draw: diagonal variance 1, off-diagonal variance 1/2, mean zero.
pub fn sample_goe(n: usize, stream: &RngStream) -> Result<RealSymmetricMatrix> {
    require_matrix_dim(n)?;
    let mut rng = stream.rng();
    Ok(RealSymmetricMatrix::from_lower(n, |i, j| {
        let g = gaussian(&mut rng);
        if i == j {
            g
        } else {
            g * FRAC_1_SQRT_2
        }
    }))
}

/// Real antisymmetric Gaussian matrix with off-diagonal variance 1/2.
pub fn sample_antisymmetric(n: usize, stream: &RngStream) -> Result<RealAntisymmetricMatrix> {
    require_matrix_dim(n)?;
    let mut rng = stream.rng();
    Ok(RealAntisymmetricMatrix::from_lower(n, |_, _| {
        gaussian(&mut rng) * FRAC_1_SQRT_2
    }))
}

/// GUE draw: real diagonal of variance 1; off-diagonal real and imaginary
/// parts of variance 1/2 each (real part drawn first).
pub fn sample_gue(n: usize, stream: &RngStream) -> Result<HermitianMatrix> {
    require_matrix_dim(n)?;
    let mut rng = stream.rng();
    let mut m = Mat::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = Complex64::new(gaussian(&mut rng), 0.0);
        for i in (j + 1)..n {
            let re = gaussian(&mut rng) * FRAC_1_SQRT_2;
            let im = gaussian(&mut rng) * FRAC_1_SQRT_2;
            let z = Complex64::new(re, im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Ok(HermitianMatrix(m))
}

/// `H = S + i alpha A`. Hermitian by construction since `A^T = -A`.
pub fn crossover_hamiltonian(
    s: &RealSymmetricMatrix,
    a: &RealAntisymmetricMatrix,
    alpha: f64,
) -> Result<HermitianMatrix> {
    if s.dim() != a.dim() {
        return Err(Error::Shape(format!(
            "S is {0}x{0} but A is {1}x{1}",
            s.dim(),
            a.dim()
        )));
    }
    let n = s.dim();
    Ok(HermitianMatrix(Mat::from_fn(n, n, |i, j| {
        Complex64::new(s.get(i, j), alpha * a.get(i, j))
    })))
}

/// Pure state with i.i.d. standard normal real amplitudes, then normalized.
pub fn sample_real_state(n: usize, stream: &RngStream) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidDimension {
            dim: 0,
            reason: "a state needs at least one amplitude",
        });
    }
    let mut rng = stream.rng();
    let amplitudes = (0..n)
        .map(|_| Complex64::new(gaussian(&mut rng), 0.0))
        .collect();
    PureState::normalized(amplitudes)
}

/// Computational basis state `|k>`.
pub fn basis_state(n: usize, k: usize) -> Result<PureState> {
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, dim: n });
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[k] = Complex64::new(1.0, 0.0);
    Ok(PureState(v))
}

/// Which random-Hamiltonian family an experiment draws from.
#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianEnsembleSpec {
    Goe { n: usize },
    Gue { n: usize },
    Crossover { n: usize, alpha: f64 },
    /// Heisenberg chain restricted to `n_up = L/2`.
    SpinHalfFilling { chain_length: usize, disorder: f64 },
    /// Heisenberg chain restricted to a single excitation; dimension `L`.
    SpinOneExcitation { chain_length: usize, disorder: f64 },
}

impl HamiltonianEnsembleSpec {
    pub fn dimension(&self) -> usize {
        match *self {
            Self::Goe { n } | Self::Gue { n } | Self::Crossover { n, .. } => n,
            Self::SpinHalfFilling { chain_length, .. } => {
                spin_chain::binomial(chain_length, chain_length / 2) as usize
            }
            Self::SpinOneExcitation { chain_length, .. } => chain_length,
        }
    }

    /// `true` when every member is a real symmetric matrix.
    pub fn is_real(&self) -> bool {
        !matches!(self, Self::Gue { .. } | Self::Crossover { .. })
    }
}

/// A sampled Hamiltonian, real when the family is.
#[derive(Clone, Debug)]
pub enum Hamiltonian {
    Real(RealSymmetricMatrix),
    Complex(HermitianMatrix),
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            Self::Real(h) => h.dim(),
            Self::Complex(h) => h.dim(),
        }
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        match self {
            Self::Real(h) => h.to_hermitian(),
            Self::Complex(h) => h.clone(),
        }
    }
}

/// Sampler for one [`HamiltonianEnsembleSpec`], caching the spin basis.
#[derive(Clone, Debug)]
pub struct HamiltonianSource {
    spec: HamiltonianEnsembleSpec,
    basis: Option<SubspaceBasis>,
}

impl HamiltonianSource {
    pub fn new(spec: HamiltonianEnsembleSpec) -> Result<Self> {
        let basis = match spec {
            HamiltonianEnsembleSpec::SpinHalfFilling { chain_length, disorder } => {
                if chain_length % 2 != 0 {
                    return Err(Error::Config(format!(
                        "half filling needs an even chain length, got {chain_length}"
                    )));
                }
                check_disorder(disorder)?;
                Some(spin_chain::build_basis(chain_length, chain_length / 2)?)
            }
            HamiltonianEnsembleSpec::SpinOneExcitation { chain_length, disorder } => {
                if chain_length < 2 {
                    return Err(Error::InvalidDimension {
                        dim: chain_length,
                        reason: "spin chains need L >= 2",
                    });
                }
                check_disorder(disorder)?;
                None
            }
            HamiltonianEnsembleSpec::Goe { n }
            | HamiltonianEnsembleSpec::Gue { n }
            | HamiltonianEnsembleSpec::Crossover { n, .. } => {
                require_matrix_dim(n)?;
                None
            }
        };
        Ok(Self { spec, basis })
    }

    pub fn spec(&self) -> &HamiltonianEnsembleSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    /// Draws one Hamiltonian from `stream`. Spin families use the stream
    /// for their disorder fields; the crossover family draws `S` and `A`
    /// from two consecutive slots of the same member.
    pub fn sample(&self, stream: &RngStream) -> Result<Hamiltonian> {
        match self.spec {
            HamiltonianEnsembleSpec::Goe { n } => Ok(Hamiltonian::Real(sample_goe(n, stream)?)),
            HamiltonianEnsembleSpec::Gue { n } => Ok(Hamiltonian::Complex(sample_gue(n, stream)?)),
            HamiltonianEnsembleSpec::Crossover { n, alpha } => {
                let s = sample_goe(n, stream)?;
                let a_stream = stream.with_slot(stream.id.slot.wrapping_add(0x8000_0000));
                let a = sample_antisymmetric(n, &a_stream)?;
                Ok(Hamiltonian::Complex(crossover_hamiltonian(&s, &a, alpha)?))
            }
            HamiltonianEnsembleSpec::SpinHalfFilling { chain_length, disorder } => {
                let fields = spin_chain::sample_disorder(chain_length, disorder, stream)?;
                let basis = self.basis.as_ref().expect("basis built in new()");
                Ok(Hamiltonian::Real(spin_chain::heisenberg(basis, &fields)?))
            }
            HamiltonianEnsembleSpec::SpinOneExcitation { chain_length, disorder } => {
                let fields = spin_chain::sample_disorder(chain_length, disorder, stream)?;
                Ok(Hamiltonian::Real(spin_chain::one_excitation_hamiltonian(
                    chain_length,
                    &fields,
                )?))
            }
        }
    }
}

fn check_disorder(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("disorder strength must be positive, got {h}")));
    }
    Ok(())
}
