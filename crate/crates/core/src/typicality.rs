//! Single-site populations of sector eigenstates and the rms atypicality.
//!
//! Inside a fixed-charge sector two configurations never differ at exactly one
//! site, so every single-site reduced state is diagonal in the level basis and
//! is fully described by its populations.
//!
//! The atypicality of a sector is
//! `delta_rms = sqrt( (1 / (D N)) * sum_{n,j} delta_{j,n}^2 )`, where
//! `delta_{j,n}` compares the populations of site `j` in eigenstate `n` with
//! the micro-canonical populations of the sector. Spin-1/2 tracks the up
//! population; spin-1 sums the squared differences of the `m = +1` and
//! `m = 0` populations.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, LocalDimension, SectorBasis, SectorInfo};
use crate::spectra::{degeneracy_fraction, EigenDecomposition, GapStatistics};

const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypicalityError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("state vector has length {got}, sector dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state vector is not normalized: norm^2 = {0}")]
    NotNormalized(f64),
}

/// Level indices whose populations enter `delta`: up for spin-1/2,
/// `m = +1` then `m = 0` for spin-1.
pub fn tracked_levels(local_dimension: LocalDimension) -> &'static [usize] {
    match local_dimension {
        LocalDimension::SpinHalf => &[1],
        LocalDimension::SpinOne => &[2, 1],
    }
}

/// Diagonal of a single-site reduced density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SitePopulations {
    pub populations: Vec<f64>,
}

impl SitePopulations {
    pub fn total(&self) -> f64 {
        self.populations.iter().sum()
    }
}

fn check_state(state: &[f64], basis: &SectorBasis) -> Result<(), TypicalityError> {
    if state.len() != basis.dimension() {
        return Err(TypicalityError::DimensionMismatch {
            expected: basis.dimension(),
            got: state.len(),
        });
    }
    let norm2: f64 = state.iter().map(|x| x * x).sum();
    if (norm2 - 1.0).abs() > NORM_TOLERANCE {
        return Err(TypicalityError::NotNormalized(norm2));
    }
    Ok(())
}

/// Populations of `site` in the normalized sector state `state`.
pub fn reduced_populations(
    state: &[f64],
    basis: &SectorBasis,
    site: usize,
) -> Result<SitePopulations, TypicalityError> {
    if site >= basis.chain_length() {
        return Err(BasisError::SiteOutOfRange {
            site,
            chain_length: basis.chain_length(),
        }
        .into());
    }
    check_state(state, basis)?;
    let mut populations = vec![0.0; basis.local_dimension().value()];
    for (&word, amp) in basis.words().iter().zip(state) {
        populations[basis.level_at(word, site) as usize] += amp * amp;
    }
    Ok(SitePopulations { populations })
}

/// Single-site populations of the maximally mixed state on a sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicrocanonicalReference {
    pub sector: SectorInfo,
    counts: Vec<u64>,
}

impl MicrocanonicalReference {
    /// Exact population of `level` as `count / D`.
    pub fn rational(&self, level: usize) -> Ratio<u64> {
        Ratio::new(self.counts[level], self.sector.dimension as u64)
    }

    pub fn population(&self, level: usize) -> f64 {
        self.counts[level] as f64 / self.sector.dimension as f64
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|l| self.population(l)).collect()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// Counting definition: the fraction of sector configurations with a given
/// level at one site. For spin-1/2 the up population reduces to `M / N`.
pub fn microcanonical_reference(basis: &SectorBasis) -> MicrocanonicalReference {
    let counts = basis
        .site_level_counts(0)
        .expect("a sector has at least one site");
    MicrocanonicalReference {
        sector: basis.info(),
        counts,
    }
}

/// Signed deviations `p_n,j[level] - p_ref[level]` for every eigenstate,
/// site and tracked level.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationTable {
    dimension: usize,
    chain_length: usize,
    components: usize,
    // index ((n * N) + j) * components + c
    values: Vec<f64>,
}

impl DeviationTable {
    pub fn get(&self, state: usize, site: usize, component: usize) -> f64 {
        self.values[(state * self.chain_length + site) * self.components + component]
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// `delta_{j,n}^2`, summed over tracked levels.
    pub fn squared(&self, state: usize, site: usize) -> f64 {
        (0..self.components)
            .map(|c| self.get(state, site, c).powi(2))
            .sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    /// `sum_n delta_{j,n}` for each site and tracked level.
    pub fn site_sums(&self) -> Vec<Vec<f64>> {
        (0..self.chain_length)
            .map(|j| {
                (0..self.components)
                    .map(|c| (0..self.dimension).map(|n| self.get(n, j, c)).sum())
                    .collect()
            })
            .collect()
    }
}

/// Atypicality of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityReport {
    pub sector: SectorInfo,
    pub delta_rms: f64,
    /// Absent for one-dimensional sectors.
    pub degeneracy: Option<GapStatistics>,
    /// Largest `|sum_n delta_{j,n}|` over sites and tracked levels. Zero up to
    /// roundoff because the eigenstates average to the micro-canonical state.
    pub sum_rule_residual: f64,
    pub deviations: Option<DeviationTable>,
}

impl TypicalityReport {
    pub fn degeneracy_fraction(&self) -> Option<f64> {
        self.degeneracy.as_ref().map(|g| g.degeneracy_fraction)
    }

    pub fn mean_gap(&self) -> Option<f64> {
        self.degeneracy.as_ref().map(|g| g.mean_gap)
    }
}

/// Atypicality and degeneracy statistics of the eigenstates in `decomposition`.
pub fn atypicality(
    decomposition: &EigenDecomposition,
    basis: &SectorBasis,
) -> Result<TypicalityReport, TypicalityError> {
    compute(decomposition, basis, false)
}

/// As [`atypicality`], keeping the full `D x N` deviation table.
pub fn atypicality_with_deviations(
    decomposition: &EigenDecomposition,
    basis: &SectorBasis,
) -> Result<TypicalityReport, TypicalityError> {
    compute(decomposition, basis, true)
}

fn compute(
    decomposition: &EigenDecomposition,
    basis: &SectorBasis,
    retain: bool,
) -> Result<TypicalityReport, TypicalityError> {
    let dim = basis.dimension();
    if decomposition.dimension() != dim {
        return Err(TypicalityError::DimensionMismatch {
            expected: dim,
            got: decomposition.dimension(),
        });
    }
    let n = basis.chain_length();
    let d = basis.local_dimension().value();
    let tracked = tracked_levels(basis.local_dimension());
    let reference = microcanonical_reference(basis).populations();
    let levels = basis.level_table();

    let mut populations = vec![0.0; n * d];
    let mut site_sums = vec![0.0; n * tracked.len()];
    let mut sum_sq = 0.0;
    let mut retained = if retain {
        Vec::with_capacity(dim * n * tracked.len())
    } else {
        Vec::new()
    };

    for state in decomposition.eigenvectors() {
        check_state(state, basis)?;
        populations.fill(0.0);
        for (row, amp) in levels.chunks_exact(n).zip(state) {
            let w = amp * amp;
            for (j, &l) in row.iter().enumerate() {
                populations[j * d + l as usize] += w;
            }
        }
        for j in 0..n {
            for (c, &level) in tracked.iter().enumerate() {
                let delta = populations[j * d + level] - reference[level];
                sum_sq += delta * delta;
                site_sums[j * tracked.len() + c] += delta;
                if retain {
                    retained.push(delta);
                }
            }
        }
    }

    let delta_rms = (sum_sq / (dim * n) as f64).sqrt();
    let degeneracy = if dim >= 2 {
        Some(degeneracy_fraction(decomposition.eigenvalues()).expect("eigenvalues are sorted"))
    } else {
        None
    };
    let sum_rule_residual = site_sums.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let deviations = retain.then_some(DeviationTable {
        dimension: dim,
        chain_length: n,
        components: tracked.len(),
        values: retained,
    });

    Ok(TypicalityReport {
        sector: basis.info(),
        delta_rms,
        degeneracy,
        sum_rule_residual,
        deviations,
    })
}
