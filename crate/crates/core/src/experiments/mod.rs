//! Experiment families, result records and their JSONL form.

mod aggregate;
mod fit;
mod runner;

use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonian::DEFAULT_THETA;
use crate::spectra::MemoryBudget;

pub use aggregate::{aggregate, write_summary_csv, AggregateError, SummaryRow, SUMMARY_HEADER};
pub use fit::{fit_power_law, fit_summary, FitError, ScalingFit};
pub use runner::{
    run_goe_baseline, run_plan, run_spin_half_sweep, run_spin_one_ensemble, EnsembleRun,
};

/// Default number of GOE samples per dimension.
pub const DEFAULT_GOE_SAMPLES: usize = 50;
/// Default number of random spin-1 interactions.
pub const DEFAULT_SPIN_ONE_SAMPLES: usize = 21;
/// Up-spin count of the fixed-M family.
pub const DEFAULT_FIXED_M: usize = 6;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid plan: {0}")]
    Invalid(String),
    #[error("could not parse sector label {0:?}, expected N:M")]
    Label(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SpinHalfSectorSweep,
    SpinHalfFixedM,
    SpinOneRandomInteractions,
    GoeBaseline,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::SpinHalfSectorSweep => "spin_half_sector_sweep",
            Self::SpinHalfFixedM => "spin_half_fixed_m",
            Self::SpinOneRandomInteractions => "spin_one_random_interactions",
            Self::GoeBaseline => "goe_baseline",
        }
    }

    pub fn is_ensemble(self) -> bool {
        matches!(self, Self::SpinOneRandomInteractions | Self::GoeBaseline)
    }
}

/// Which spin-1/2 sector is followed as the chain grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinHalfSector {
    /// `M = trunc(N/2)`.
    Half,
    /// `M = trunc(N/2) - 1`.
    HalfMinusOne,
    /// `M = trunc(N/2) - 2`.
    HalfMinusTwo,
    /// `M` fixed.
    Fixed(usize),
}

impl SpinHalfSector {
    /// Up-spin count at chain length `n`, if the sector is non-trivial there.
    pub fn charge_at(self, n: usize) -> Option<usize> {
        let m = match self {
            Self::Half => Some(n / 2),
            Self::HalfMinusOne => (n / 2).checked_sub(1),
            Self::HalfMinusTwo => (n / 2).checked_sub(2),
            Self::Fixed(m) => Some(m),
        }?;
        // M = 0 and M = N are one-dimensional and trivially typical
        (m >= 1 && m < n).then_some(m)
    }

    fn odd_only(self) -> bool {
        !matches!(self, Self::Fixed(_))
    }

    pub fn family(self) -> Family {
        match self {
            Self::Fixed(_) => Family::SpinHalfFixedM,
            _ => Family::SpinHalfSectorSweep,
        }
    }
}

/// One sector of the grid: chain length and conserved charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub chain_length: usize,
    pub charge: i64,
}

/// Parses `N:M` sector labels.
pub fn parse_label(label: &str) -> Result<GridPoint, PlanError> {
    let (n, m) = label
        .split_once(':')
        .ok_or_else(|| PlanError::Label(label.to_string()))?;
    let chain_length = n
        .trim()
        .parse()
        .map_err(|_| PlanError::Label(label.to_string()))?;
    let charge = m
        .trim()
        .parse()
        .map_err(|_| PlanError::Label(label.to_string()))?;
    Ok(GridPoint {
        chain_length,
        charge,
    })
}

/// A full experiment: family, sector grid, ensemble size and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub family: Family,
    pub grid: Vec<GridPoint>,
    pub samples: usize,
    pub seed: u64,
    /// Spin-1/2 interaction angle; ignored by the other families.
    pub theta: f64,
    /// Records are written here by the CLI.
    pub output: Option<PathBuf>,
    /// Per-sector spectra are written here when set.
    pub spectrum_dir: Option<PathBuf>,
    pub memory_budget: MemoryBudget,
    /// Run grid points on the rayon pool; results are identical either way.
    pub parallel: bool,
}

impl ExperimentPlan {
    fn base(family: Family, grid: Vec<GridPoint>, samples: usize, seed: u64) -> Self {
        Self {
            family,
            grid,
            samples,
            seed,
            theta: DEFAULT_THETA,
            output: None,
            spectrum_dir: None,
            memory_budget: MemoryBudget::from_env(),
            parallel: true,
        }
    }

    /// Spin-1/2 sector family over `n_min..=n_max`; the `trunc(N/2)` families
    /// use odd `N` only.
    pub fn spin_half(sector: SpinHalfSector, n_min: usize, n_max: usize, theta: f64) -> Self {
        let grid = (n_min..=n_max)
            .filter(|n| !sector.odd_only() || n % 2 == 1)
            .filter_map(|n| {
                sector.charge_at(n).map(|m| GridPoint {
                    chain_length: n,
                    charge: m as i64,
                })
            })
            .collect();
        let mut plan = Self::base(sector.family(), grid, 1, 0);
        plan.theta = theta;
        plan
    }

    /// Zero-magnetization spin-1 sectors over `n_min..=n_max`.
    pub fn spin_one(n_min: usize, n_max: usize, samples: usize, seed: u64) -> Self {
        let grid = (n_min..=n_max)
            .map(|n| GridPoint {
                chain_length: n,
                charge: 0,
            })
            .collect();
        Self::base(Family::SpinOneRandomInteractions, grid, samples, seed)
    }

    /// GOE matrices of dimension `C(N, M)` for each `N:M` label.
    pub fn goe(labels: &[GridPoint], samples: usize, seed: u64) -> Self {
        Self::base(Family::GoeBaseline, labels.to_vec(), samples, seed)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.grid.is_empty() {
            return Err(PlanError::Invalid("empty grid".into()));
        }
        if self.samples == 0 {
            return Err(PlanError::Invalid("samples must be at least 1".into()));
        }
        if !self.family.is_ensemble() && self.samples != 1 {
            return Err(PlanError::Invalid(
                "spin-1/2 families are deterministic, use samples = 1".into(),
            ));
        }
        if !self.theta.is_finite() {
            return Err(PlanError::Invalid("theta must be finite".into()));
        }
        Ok(())
    }
}

/// One grid point (and sample) of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub family: Family,
    pub sample: usize,
    #[serde(rename = "N")]
    pub chain_length: usize,
    pub local_dim: usize,
    pub charge: i64,
    /// Sector dimension; 0 when the sector could not be formed.
    #[serde(rename = "D")]
    pub dimension: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// `[a12, a13, a23]` of a spin-1 interaction.
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<[f64; 3]>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub delta_rms: Option<f64>,
    #[serde(default)]
    pub f_deg: Option<f64>,
    #[serde(default)]
    pub mean_gap: Option<f64>,
    #[serde(default)]
    pub sum_rule_residual: Option<f64>,
    pub runtime_seconds: f64,
    #[serde(default)]
    pub spec_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.delta_rms.is_some()
    }
}

pub fn write_jsonl(path: &Path, records: &[ResultRecord]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl(path: &Path) -> io::Result<Vec<ResultRecord>> {
    let file = io::BufReader::new(fs::File::open(path)?);
    let mut records = Vec::new();
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), lineno + 1),
            )
        })?;
        records.push(record);
    }
    Ok(records)
}
