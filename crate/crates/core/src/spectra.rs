//! Dense symmetric eigendecomposition, adjacent gaps and the degeneracy fraction.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonian::DenseMatrix;

/// Environment variable capping dense-matrix memory, in MiB.
pub const MEM_BUDGET_ENV: &str = "TYPICALITY_MEM_BUDGET_MB";

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {difference:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        difference: f64,
    },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is empty")]
    Empty,
    #[error(
        "decomposition of dimension {dimension} needs {required} bytes, budget is {budget} bytes"
    )]
    MemoryBudget {
        dimension: usize,
        required: u64,
        budget: u64,
    },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("need at least 2 eigenvalues, got {0}")]
    TooFewEigenvalues(usize),
    #[error("eigenvalues are not in non-decreasing order at index {0}")]
    Unsorted(usize),
}

/// Upper bound on the memory a dense decomposition of one matrix may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    bytes: Option<u64>,
}

impl MemoryBudget {
    pub fn unlimited() -> Self {
        Self { bytes: None }
    }

    pub fn megabytes(mb: u64) -> Self {
        Self {
            bytes: Some(mb.saturating_mul(1024 * 1024)),
        }
    }

    /// Reads [`MEM_BUDGET_ENV`]; unset or unparsable means unlimited.
    pub fn from_env() -> Self {
        std::env::var(MEM_BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Self::megabytes)
            .unwrap_or_else(Self::unlimited)
    }

    pub fn bytes(&self) -> Option<u64> {
        self.bytes
    }

    /// Input matrix, solver copy, eigenvectors and workspace.
    pub fn required_for(dimension: usize) -> u64 {
        4 * (dimension as u64).pow(2) * std::mem::size_of::<f64>() as u64
    }

    pub fn admit(&self, dimension: usize) -> Result<(), SpectraError> {
        let required = Self::required_for(dimension);
        match self.bytes {
            Some(budget) if required > budget => Err(SpectraError::MemoryBudget {
                dimension,
                required,
                budget,
            }),
            _ => Ok(()),
        }
    }
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    // column-major: eigenvector k occupies [k * D, (k + 1) * D)
    eigenvectors: Vec<f64>,
}

impl EigenDecomposition {
    /// Assembles a decomposition from parts; eigenvectors column-major.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Vec<f64>) -> Self {
        assert_eq!(eigenvectors.len(), eigenvalues.len().pow(2));
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        let d = self.dimension();
        &self.eigenvectors[k * d..(k + 1) * d]
    }

    pub fn eigenvectors(&self) -> impl Iterator<Item = &[f64]> {
        self.eigenvectors.chunks_exact(self.dimension().max(1))
    }

    /// Largest `||H v_k - lambda_k v_k||_2` over all k.
    pub fn max_residual(&self, matrix: &DenseMatrix) -> f64 {
        let d = self.dimension();
        let mut hv = vec![0.0; d];
        let mut worst = 0.0f64;
        for (k, v) in self.eigenvectors().enumerate() {
            for (i, out) in hv.iter_mut().enumerate() {
                *out = matrix.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
            }
            let lambda = self.eigenvalues[k];
            let r = hv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }

    /// Largest `|<v_j, v_k> - delta_jk|` over the given index pairs.
    pub fn max_orthonormality_error(&self, pairs: impl IntoIterator<Item = (usize, usize)>) -> f64 {
        pairs
            .into_iter()
            .map(|(j, k)| {
                let dot: f64 = self
                    .eigenvector(j)
                    .iter()
                    .zip(self.eigenvector(k))
                    .map(|(a, b)| a * b)
                    .sum();
                (dot - if j == k { 1.0 } else { 0.0 }).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Entry `(i, j)` of `V diag(lambda) V^T`.
    pub fn reconstruct_entry(&self, i: usize, j: usize) -> f64 {
        let d = self.dimension();
        (0..d)
            .map(|k| {
                self.eigenvalues[k] * self.eigenvectors[k * d + i] * self.eigenvectors[k * d + j]
            })
            .sum()
    }
}

fn validate(matrix: &DenseMatrix) -> Result<(), SpectraError> {
    let d = matrix.dim();
    if d == 0 {
        return Err(SpectraError::Empty);
    }
    let mut scale = 0.0f64;
    for i in 0..d {
        for (j, x) in matrix.row(i).iter().enumerate() {
            if !x.is_finite() {
                return Err(SpectraError::NonFinite { row: i, col: j });
            }
            scale = scale.max(x.abs());
        }
    }
    let tol = SYMMETRY_TOLERANCE * scale;
    for i in 0..d {
        for j in 0..i {
            let difference = (matrix[(i, j)] - matrix[(j, i)]).abs();
            if difference > tol {
                return Err(SpectraError::NotSymmetric {
                    row: i,
                    col: j,
                    difference,
                });
            }
        }
    }
    Ok(())
}

fn to_faer(matrix: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(matrix.dim(), matrix.dim(), |i, j| matrix[(i, j)])
}

/// Full eigendecomposition of a real symmetric matrix, with the memory budget
/// taken from the environment.
pub fn eig_symmetric(matrix: &DenseMatrix) -> Result<EigenDecomposition, SpectraError> {
    eig_symmetric_with_budget(matrix, MemoryBudget::from_env())
}

/// Householder tridiagonalization followed by a divide-and-conquer solve,
/// single-threaded so results do not depend on the host.
pub fn eig_symmetric_with_budget(
    matrix: &DenseMatrix,
    budget: MemoryBudget,
) -> Result<EigenDecomposition, SpectraError> {
    validate(matrix)?;
    budget.admit(matrix.dim())?;
    let d = matrix.dim();
    let evd = to_faer(matrix)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| SpectraError::NoConvergence)?;
    let s = evd.S().column_vector();
    let u = evd.U();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let mut eigenvectors = Vec::with_capacity(d * d);
    for &k in &order {
        eigenvectors.extend((0..d).map(|i| u[(i, k)]));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues_symmetric(matrix: &DenseMatrix) -> Result<Vec<f64>, SpectraError> {
    validate(matrix)?;
    let mut values = to_faer(matrix)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| SpectraError::NoConvergence)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Adjacent-gap statistics of one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStatistics {
    pub gaps: Vec<f64>,
    pub mean_gap: f64,
    /// `mean_gap / 10`.
    pub threshold: f64,
    pub degeneracy_fraction: f64,
}

impl GapStatistics {
    /// Variant of the degeneracy fraction counting the longest run of
    /// neighbouring gaps whose sum stays below the threshold.
    pub fn consecutive_fraction(&self) -> f64 {
        let d = self.gaps.len() + 1;
        if self.mean_gap == 0.0 {
            return 1.0;
        }
        let (mut best, mut start, mut total) = (0usize, 0usize, 0.0);
        for (end, g) in self.gaps.iter().enumerate() {
            total += g;
            while total >= self.threshold && start <= end {
                total -= self.gaps[start];
                start += 1;
            }
            best = best.max(end + 1 - start);
        }
        best as f64 / d as f64
    }
}

/// Degeneracy fraction: the largest number `k` of gaps whose combined sum
/// stays strictly below a tenth of the mean gap, divided by the number of
/// levels. The `k` smallest gaps are taken, which maximizes `k`. A fully
/// degenerate spectrum has fraction 1.
pub fn degeneracy_fraction(eigenvalues: &[f64]) -> Result<GapStatistics, SpectraError> {
    let d = eigenvalues.len();
    if d < 2 {
        return Err(SpectraError::TooFewEigenvalues(d));
    }
    if let Some(i) = eigenvalues.windows(2).position(|w| w[1] < w[0]) {
        return Err(SpectraError::Unsorted(i + 1));
    }
    let gaps: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let threshold = mean_gap / 10.0;
    let degeneracy_fraction = if mean_gap == 0.0 {
        1.0
    } else {
        let mut sorted = gaps.clone();
        sorted.sort_by(f64::total_cmp);
        let mut total = 0.0;
        let mut count = 0usize;
        for g in sorted {
            total += g;
            if total < threshold {
                count += 1;
            } else {
                break;
            }
        }
        count as f64 / d as f64
    };
    Ok(GapStatistics {
        gaps,
        mean_gap,
        threshold,
        degeneracy_fraction,
    })
}

/// Unnormalized adjacent gaps in spectral order.
pub fn export_gaps(decomposition: &EigenDecomposition) -> Vec<f64> {
    decomposition
        .eigenvalues()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect()
}

/// Writes `{family}_{N}_{charge}.spectrum.csv` with columns `index,eigenvalue`.
pub fn write_spectrum_csv(
    dir: &Path,
    family: &str,
    chain_length: usize,
    charge: i64,
    eigenvalues: &[f64],
) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{family}_{chain_length}_{charge}.spectrum.csv"));
    let mut out = io::BufWriter::new(fs::File::create(&path)?);
    writeln!(out, "index,eigenvalue")?;
    for (i, e) in eigenvalues.iter().enumerate() {
        writeln!(out, "{i},{e:.16e}")?;
    }
    out.flush()?;
    Ok(path)
}
