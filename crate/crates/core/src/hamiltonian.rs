//! Sector Hamiltonians of nearest-neighbour chains and GOE baselines.
//!
//! In the weak-coupling limit the interaction only connects product states
//! that are degenerate under the free Hamiltonian, so each sector evolves
//! under the projected block `P H_int P` with
//! `H_int = g * sum_{j=0}^{N-2} O_j O_{j+1}` on an open chain. The free
//! splitting is constant inside a sector and is not part of the block.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, LocalDimension, SectorBasis};

/// Interaction angle of the spin-1/2 chain, `0.375 pi`.
pub const DEFAULT_THETA: f64 = 0.375 * PI;

/// Largest full product space the brute-force oracle will build.
pub const ORACLE_MAX_STATES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),
    #[error("basis does not match chain spec: {0}")]
    BasisMismatch(String),
    #[error("matrix dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("full product space of {states} states exceeds the oracle limit {limit}")]
    Capacity { states: u128, limit: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// The single-site interaction operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InteractionSpec {
    /// `O = cos(theta) sigma_z + sin(theta) sigma_x`.
    SpinHalfAngle { theta: f64 },
    /// Real symmetric 3x3 `A` with zero diagonal; `a12` couples `m = -1` and
    /// `m = 0`, `a13` couples `m = -1` and `m = +1`, `a23` couples `m = 0` and
    /// `m = +1`.
    SpinOneMatrix { a12: f64, a13: f64, a23: f64 },
}

impl InteractionSpec {
    pub fn local_dimension(&self) -> LocalDimension {
        match self {
            Self::SpinHalfAngle { .. } => LocalDimension::SpinHalf,
            Self::SpinOneMatrix { .. } => LocalDimension::SpinOne,
        }
    }

    /// Row-major `d x d` operator in the level basis.
    ///
    /// For spin-1/2 the level order is (down, up), so `sigma_z = diag(-1, +1)`.
    pub fn local_operator(&self) -> Vec<f64> {
        match *self {
            Self::SpinHalfAngle { theta } => {
                let (s, c) = theta.sin_cos();
                vec![-c, s, s, c]
            }
            Self::SpinOneMatrix { a12, a13, a23 } => {
                vec![0.0, a12, a13, a12, 0.0, a23, a13, a23, 0.0]
            }
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Self::SpinHalfAngle { theta } => theta.is_finite(),
            Self::SpinOneMatrix { a12, a13, a23 } => {
                a12.is_finite() && a13.is_finite() && a23.is_finite()
            }
        }
    }
}

/// A chain experiment: length, free splitting, coupling and interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub chain_length: usize,
    /// Free level splitting. Constant within a sector; kept as metadata.
    pub level_splitting: f64,
    pub coupling: f64,
    pub interaction: InteractionSpec,
}

impl ChainSpec {
    pub fn spin_half(chain_length: usize, theta: f64) -> Self {
        Self {
            chain_length,
            level_splitting: 1.0,
            coupling: 1.0,
            interaction: InteractionSpec::SpinHalfAngle { theta },
        }
    }

    pub fn spin_one(chain_length: usize, interaction: InteractionSpec) -> Self {
        Self {
            chain_length,
            level_splitting: 1.0,
            coupling: 1.0,
            interaction,
        }
    }

    pub fn local_dimension(&self) -> LocalDimension {
        self.interaction.local_dimension()
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if self.chain_length < 2 {
            return Err(HamiltonianError::InvalidSpec(format!(
                "chain length {} is below 2",
                self.chain_length
            )));
        }
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(HamiltonianError::InvalidSpec(format!(
                "coupling {} must be positive",
                self.coupling
            )));
        }
        if !self.interaction.is_finite() || !self.level_splitting.is_finite() {
            return Err(HamiltonianError::InvalidSpec("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            dim * dim,
            "row-major data must hold dim^2 entries"
        );
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Bit-exact symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self[(i, j)].to_bits() == self[(j, i)].to_bits()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let (a, b) = (self.dim, other.dim);
        let mut out = DenseMatrix::zeros(a * b);
        for i in 0..a {
            for j in 0..a {
                let x = self[(i, j)];
                if x == 0.0 {
                    continue;
                }
                for k in 0..b {
                    let row = (i * b + k) * a * b + j * b;
                    for (dst, &y) in out.data[row..row + b].iter_mut().zip(other.row(k)) {
                        *dst = x * y;
                    }
                }
            }
        }
        out
    }

    /// Rows and columns at `indices`, in order.
    pub fn submatrix(&self, indices: &[usize]) -> DenseMatrix {
        let n = indices.len();
        let mut out = DenseMatrix::zeros(n);
        for (r, &i) in indices.iter().enumerate() {
            for (c, &j) in indices.iter().enumerate() {
                out[(r, c)] = self[(i, j)];
            }
        }
        out
    }

    // Orthogonal similarity Q M Q^T, used by invariance tests.
    #[doc(hidden)]
    pub fn conjugate_by(&self, q: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        assert_eq!(q.dim, n);
        let mut tmp = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = q[(i, k)];
                for (dst, &y) in tmp.data[i * n..(i + 1) * n].iter_mut().zip(self.row(k)) {
                    *dst += x * y;
                }
            }
        }
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = tmp.row(i).iter().zip(q.row(j)).map(|(a, b)| a * b).sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// The interaction restricted to one sector.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub basis: Arc<SectorBasis>,
    pub matrix: DenseMatrix,
}

// Charge-conserving two-site transitions (a, b) -> (a2, b2) with amplitude
// <a2|O|a> <b2|O|b>, indexed by a * d + b.
fn bond_transitions(op: &[f64], d: usize) -> Vec<Vec<(usize, usize, f64)>> {
    let mut table = vec![Vec::new(); d * d];
    for a in 0..d {
        for b in 0..d {
            for a2 in 0..d {
                let Some(b2) = (a + b).checked_sub(a2) else {
                    continue;
                };
                if b2 >= d {
                    continue;
                }
                let amp = op[a2 * d + a] * op[b2 * d + b];
                if amp != 0.0 {
                    table[a * d + b].push((a2, b2, amp));
                }
            }
        }
    }
    table
}

/// Projects the nearest-neighbour interaction of `spec` onto `basis`.
///
/// The upper triangle is accumulated and mirrored, so the result is
/// symmetric bit for bit.
pub fn build_sector_hamiltonian(
    spec: &ChainSpec,
    basis: Arc<SectorBasis>,
) -> Result<SectorHamiltonian, HamiltonianError> {
    spec.validate()?;
    if basis.chain_length() != spec.chain_length {
        return Err(HamiltonianError::BasisMismatch(format!(
            "basis has {} sites, spec has {}",
            basis.chain_length(),
            spec.chain_length
        )));
    }
    if basis.local_dimension() != spec.local_dimension() {
        return Err(HamiltonianError::BasisMismatch(format!(
            "basis local dimension {}, interaction local dimension {}",
            basis.local_dimension().value(),
            spec.local_dimension().value()
        )));
    }

    let n = spec.chain_length;
    let d = spec.local_dimension().value();
    let dim = basis.dimension();
    let g = spec.coupling;
    let transitions = bond_transitions(&spec.interaction.local_operator(), d);

    let mut matrix = DenseMatrix::zeros(dim);
    let mut levels = vec![0u8; n];
    for (i, &word) in basis.words().iter().enumerate() {
        basis.unpack_into(word, &mut levels);
        let mut diagonal = 0.0;
        for j in 0..n - 1 {
            let (a, b) = (levels[j] as usize, levels[j + 1] as usize);
            for &(a2, b2, amp) in &transitions[a * d + b] {
                if a2 == a {
                    // a2 + b2 = a + b, so the pair is unchanged
                    diagonal += amp;
                    continue;
                }
                let target = word as i128
                    + (a2 as i128 - a as i128) * basis.place_value(j) as i128
                    + (b2 as i128 - b as i128) * basis.place_value(j + 1) as i128;
                let k = basis
                    .rank_word(target as u64)
                    .expect("charge-conserving transition left the sector");
                if k > i {
                    matrix[(i, k)] += g * amp;
                }
            }
        }
        matrix[(i, i)] = g * diagonal;
    }
    for i in 0..dim {
        for k in (i + 1)..dim {
            matrix[(k, i)] = matrix[(i, k)];
        }
    }
    Ok(SectorHamiltonian { basis, matrix })
}

/// Full-space interaction `g * sum_j I ⊗ .. ⊗ O ⊗ O ⊗ .. ⊗ I`, built from
/// explicit Kronecker products. Index order matches packed sector words
/// (site 0 most significant).
pub fn build_full_hamiltonian_oracle(spec: &ChainSpec) -> Result<DenseMatrix, HamiltonianError> {
    spec.validate()?;
    let d = spec.local_dimension().value();
    let n = spec.chain_length;
    let states = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > ORACLE_MAX_STATES as u128 {
        return Err(HamiltonianError::Capacity {
            states,
            limit: ORACLE_MAX_STATES,
        });
    }
    let op = DenseMatrix::from_row_major(d, spec.interaction.local_operator());
    let pair = op.kron(&op);
    let total = states as usize;
    let mut full = DenseMatrix::zeros(total);
    for j in 0..n - 1 {
        let left = DenseMatrix::identity(d.pow(j as u32));
        let right = DenseMatrix::identity(d.pow((n - j - 2) as u32));
        let term = left.kron(&pair).kron(&right);
        for (dst, src) in full.data.iter_mut().zip(term.data) {
            *dst += spec.coupling * src;
        }
    }
    Ok(full)
}

/// Rows and columns of a full-space matrix belonging to `basis`.
pub fn project_onto_sector(full: &DenseMatrix, basis: &SectorBasis) -> DenseMatrix {
    let indices: Vec<usize> = basis.words().iter().map(|&w| w as usize).collect();
    full.submatrix(&indices)
}

/// Real symmetric GOE sample: off-diagonal entries `N(0, 1)`, diagonal
/// entries `N(0, 2)`.
pub fn sample_goe<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<DenseMatrix, HamiltonianError> {
    if dim < 2 {
        return Err(HamiltonianError::DimensionTooSmall(dim));
    }
    let mut m = DenseMatrix::zeros(dim);
    for i in 0..dim {
        let x: f64 = rng.sample(StandardNormal);
        m[(i, i)] = std::f64::consts::SQRT_2 * x;
        for j in (i + 1)..dim {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    Ok(m)
}

/// Zero-diagonal spin-1 interaction with `N(0, 1)` off-diagonal entries.
pub fn sample_spin_one_interaction<R: Rng + ?Sized>(rng: &mut R) -> InteractionSpec {
    InteractionSpec::SpinOneMatrix {
        a12: rng.sample(StandardNormal),
        a13: rng.sample(StandardNormal),
        a23: rng.sample(StandardNormal),
    }
}
