//! Disordered spin-1/2 Heisenberg ring in a fixed-magnetization sector.
//!
//! `H = sum_k S_k . S_{k+1} + sum_k h_k S^z_k` with `S_{L+1} = S_1`.
//! Site `k` is bit `k` of a configuration; a set bit is spin up
//! (`S^z = +1/2`). Sectors are ordered by ascending integer encoding.

use rand::Rng;

use crate::ensembles::RealSymmetricMatrix;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest chain length whose configurations fit the `u64` encoding.
pub const MAX_ENCODED_LENGTH: usize = 64;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Configurations of `L` sites with exactly `n_up` up spins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    chain_length: usize,
    n_up: usize,
    states: Vec<u64>,
}

impl SubspaceBasis {
    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    /// Position of `config` in the basis.
    pub fn index_of(&self, config: u64) -> Option<usize> {
        self.states.binary_search(&config).ok()
    }
}

pub fn build_basis(chain_length: usize, n_up: usize) -> Result<SubspaceBasis> {
    if chain_length < 2 {
        return Err(Error::Config(format!("chain length must be >= 2, got {chain_length}")));
    }
    if chain_length > MAX_ENCODED_LENGTH {
        return Err(Error::Config(format!(
            "chain length {chain_length} exceeds the {MAX_ENCODED_LENGTH}-bit encoding; \
             use one_excitation_hamiltonian for long single-magnon chains"
        )));
    }
    if n_up > chain_length {
        return Err(Error::Config(format!(
            "n_up = {n_up} is outside 0..={chain_length}"
        )));
    }
    let count = binomial(chain_length, n_up) as usize;
    let mut states = Vec::with_capacity(count);
    if n_up == 0 {
        states.push(0);
    } else {
        // Gosper's hack enumerates fixed-popcount words in increasing order.
        let limit: u128 = 1u128 << chain_length;
        let mut x: u64 = u64::MAX >> (64 - n_up);
        while (x as u128) < limit {
            states.push(x);
            let c = x & x.wrapping_neg();
            let r = x.wrapping_add(c);
            if r == 0 {
                break;
            }
            x = (((r ^ x) >> 2) / c) | r;
        }
    }
    debug_assert_eq!(states.len(), count);
    Ok(SubspaceBasis {
        chain_length,
        n_up,
        states,
    })
}

/// On-site fields `h_k`, each strictly inside `(-h, h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    pub fields: Vec<f64>,
    pub strength: f64,
}

pub fn sample_disorder(
    chain_length: usize,
    strength: f64,
    stream: &RngStream,
) -> Result<DisorderRealization> {
    if !(strength > 0.0 && strength.is_finite()) {
        return Err(Error::Config(format!(
            "disorder strength must be positive, got {strength}"
        )));
    }
    let mut rng = stream.rng();
    let fields = (0..chain_length)
        .map(|_| loop {
            let u: f64 = rng.random();
            let x = strength * (2.0 * u - 1.0);
            if x > -strength && x < strength {
                break x;
            }
        })
        .collect();
    Ok(DisorderRealization { fields, strength })
}

/// Diagonal energy of a configuration given by its site occupations.
fn diagonal_energy(chain_length: usize, up: impl Fn(usize) -> bool, fields: &[f64]) -> f64 {
    let sz = |k: usize| if up(k) { 0.5 } else { -0.5 };
    let mut e = 0.0;
    for k in 0..chain_length {
        e += sz(k) * sz((k + 1) % chain_length);
    }
    for (k, hk) in fields.iter().enumerate() {
        e += hk * sz(k);
    }
    e
}

/// Bonds `(k, k+1 mod L)` whose two spins are antiparallel; each such
/// bond contributes a flip-flop amplitude of 1/2.
fn flippable_bonds(chain_length: usize, up: impl Fn(usize) -> bool) -> impl Iterator<Item = (usize, usize)> {
    (0..chain_length).filter_map(move |k| {
        let k1 = (k + 1) % chain_length;
        (up(k) != up(k1)).then_some((k, k1))
    })
}

fn check_fields(chain_length: usize, disorder: &DisorderRealization) -> Result<()> {
    if disorder.fields.len() != chain_length {
        return Err(Error::Shape(format!(
            "disorder has {} fields for a chain of length {chain_length}",
            disorder.fields.len()
        )));
    }
    Ok(())
}

/// Dense Heisenberg Hamiltonian on `basis`.
pub fn heisenberg(basis: &SubspaceBasis, disorder: &DisorderRealization) -> Result<RealSymmetricMatrix> {
    let l = basis.chain_length();
    check_fields(l, disorder)?;
    let n = basis.len();
    let mut m = faer::Mat::<f64>::zeros(n, n);
    for (col, &config) in basis.states().iter().enumerate() {
        let up = |k: usize| config >> k & 1 == 1;
        m[(col, col)] = diagonal_energy(l, up, &disorder.fields);
        for (a, b) in flippable_bonds(l, up) {
            let flipped = config ^ (1u64 << a) ^ (1u64 << b);
            let row = basis.index_of(flipped).expect("flip-flop conserves magnetization");
            m[(row, col)] += 0.5;
        }
    }
    RealSymmetricMatrix::from_mat(m)
}

/// Single-magnon sector of arbitrary length: basis state `k` has its one
/// up spin on site `k`.
pub fn one_excitation_hamiltonian(
    chain_length: usize,
    disorder: &DisorderRealization,
) -> Result<RealSymmetricMatrix> {
    if chain_length < 2 {
        return Err(Error::Config(format!("chain length must be >= 2, got {chain_length}")));
    }
    check_fields(chain_length, disorder)?;
    let mut m = faer::Mat::<f64>::zeros(chain_length, chain_length);
    for site in 0..chain_length {
        let up = |k: usize| k == site;
        m[(site, site)] = diagonal_energy(chain_length, up, &disorder.fields);
        for (a, b) in flippable_bonds(chain_length, up) {
            let target = if a == site { b } else { a };
            m[(target, site)] += 0.5;
        }
    }
    RealSymmetricMatrix::from_mat(m)
}
