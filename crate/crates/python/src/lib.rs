//! Python bindings: sector bases, sector blocks, atypicality reports, gap
//! statistics, GOE sampling, power-law fits and the experiment runners.
//!
//! Matrices cross the boundary as lists of rows.

use std::sync::Arc;

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use typicality::experiments::{self, ExperimentPlan, GridPoint, ResultRecord, SpinHalfSector};
use typicality::rng::seeded_rng;
use typicality::{
    atypicality, build_sector_hamiltonian, degeneracy_fraction as gap_fraction, eig_symmetric,
    sample_goe, ChainSpec, Configuration, DenseMatrix, InteractionSpec, LocalDimension,
    DEFAULT_THETA,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn chain_spec(
    chain_length: usize,
    theta: Option<f64>,
    spin_one: Option<(f64, f64, f64)>,
) -> PyResult<ChainSpec> {
    match (theta, spin_one) {
        (Some(_), Some(_)) => Err(PyValueError::new_err(
            "give either theta or spin_one, not both",
        )),
        (_, Some((a12, a13, a23))) => Ok(ChainSpec::spin_one(
            chain_length,
            InteractionSpec::SpinOneMatrix { a12, a13, a23 },
        )),
        (theta, None) => Ok(ChainSpec::spin_half(
            chain_length,
            theta.unwrap_or(DEFAULT_THETA),
        )),
    }
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.dim()).map(|i| m.row(i).to_vec()).collect()
}

fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DenseMatrix::from_row_major(dim, rows.concat()))
}

/// Fixed-charge sector of a chain with local dimension 2 or 3.
#[pyclass(name = "SectorBasis", frozen)]
pub struct PySectorBasis {
    inner: Arc<typicality::SectorBasis>,
}

#[pymethods]
impl PySectorBasis {
    #[new]
    fn new(chain_length: usize, local_dimension: usize, charge: i64) -> PyResult<Self> {
        let ld = LocalDimension::from_value(local_dimension).map_err(value_err)?;
        let basis = typicality::SectorBasis::new(chain_length, ld, charge).map_err(value_err)?;
        Ok(Self {
            inner: Arc::new(basis),
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn chain_length(&self) -> usize {
        self.inner.chain_length()
    }

    #[getter]
    fn charge(&self) -> i64 {
        self.inner.charge()
    }

    fn __len__(&self) -> usize {
        self.inner.dimension()
    }

    /// Configuration at `index` as a digit string, site 0 first.
    fn unrank(&self, index: usize) -> PyResult<String> {
        self.inner
            .unrank(index)
            .map(|c| c.to_string())
            .map_err(|e| PyIndexError::new_err(e.to_string()))
    }

    fn rank(&self, configuration: &str) -> PyResult<usize> {
        let config: Configuration = configuration.parse().map_err(value_err)?;
        self.inner.rank(&config).map_err(value_err)
    }

    fn configurations(&self) -> Vec<String> {
        self.inner
            .words()
            .iter()
            .map(|&w| self.inner.configuration_of_word(w).to_string())
            .collect()
    }

    /// Number of basis states with each level at `site`.
    fn site_level_counts(&self, site: usize) -> PyResult<Vec<u64>> {
        self.inner.site_level_counts(site).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "SectorBasis(chain_length={}, local_dimension={}, charge={}, dimension={})",
            self.inner.chain_length(),
            self.inner.local_dimension().value(),
            self.inner.charge(),
            self.inner.dimension()
        )
    }
}

/// Sector block of the nearest-neighbour interaction.
#[pyfunction]
#[pyo3(signature = (chain_length, charge, theta=None, spin_one=None))]
fn sector_hamiltonian(
    chain_length: usize,
    charge: i64,
    theta: Option<f64>,
    spin_one: Option<(f64, f64, f64)>,
) -> PyResult<Vec<Vec<f64>>> {
    let spec = chain_spec(chain_length, theta, spin_one)?;
    let basis = typicality::SectorBasis::new(chain_length, spec.local_dimension(), charge)
        .map_err(value_err)?;
    let h = build_sector_hamiltonian(&spec, Arc::new(basis)).map_err(value_err)?;
    Ok(rows(&h.matrix))
}

/// Ascending eigenvalues and the matching eigenvectors (one list per vector).
#[pyfunction]
fn eigh(matrix: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let eig = eig_symmetric(&from_rows(matrix)?).map_err(value_err)?;
    let vectors = eig.eigenvectors().map(|v| v.to_vec()).collect();
    Ok((eig.eigenvalues().to_vec(), vectors))
}

/// Atypicality report of one sector as a dict.
#[pyfunction]
#[pyo3(signature = (chain_length, charge, theta=None, spin_one=None))]
fn sector_atypicality<'py>(
    py: Python<'py>,
    chain_length: usize,
    charge: i64,
    theta: Option<f64>,
    spin_one: Option<(f64, f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = chain_spec(chain_length, theta, spin_one)?;
    let basis = Arc::new(
        typicality::SectorBasis::new(chain_length, spec.local_dimension(), charge)
            .map_err(value_err)?,
    );
    let h = build_sector_hamiltonian(&spec, basis.clone()).map_err(value_err)?;
    let eig = eig_symmetric(&h.matrix).map_err(value_err)?;
    let report = atypicality(&eig, &basis).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("N", chain_length)?;
    out.set_item("charge", charge)?;
    out.set_item("D", basis.dimension())?;
    out.set_item("delta_rms", report.delta_rms)?;
    out.set_item("f_deg", report.degeneracy_fraction())?;
    out.set_item("mean_gap", report.mean_gap())?;
    out.set_item("sum_rule_residual", report.sum_rule_residual)?;
    Ok(out)
}

/// Fraction of near-degenerate gaps in a spectrum.
#[pyfunction]
fn degeneracy_fraction(eigenvalues: Vec<f64>) -> PyResult<f64> {
    gap_fraction(&eigenvalues)
        .map(|g| g.degeneracy_fraction)
        .map_err(value_err)
}

/// GOE matrix of dimension `dim` drawn from `seed`.
#[pyfunction]
fn goe_matrix(dim: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let m = sample_goe(dim, &mut seeded_rng(seed)).map_err(value_err)?;
    Ok(rows(&m))
}

/// Least-squares fit of `delta ~ D^-alpha`; returns a dict.
#[pyfunction]
#[pyo3(signature = (points, exclude=Vec::new()))]
fn fit_power_law<'py>(
    py: Python<'py>,
    points: Vec<(f64, f64)>,
    exclude: Vec<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let fit = experiments::fit_power_law(&points, &exclude).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("exponent", fit.exponent)?;
    out.set_item("exponent_stderr", fit.exponent_stderr)?;
    out.set_item("intercept", fit.intercept)?;
    out.set_item("points_used", fit.points_used)?;
    out.set_item("excluded_points", fit.excluded_points)?;
    Ok(out)
}

fn records_to_py<'py>(py: Python<'py>, records: &[ResultRecord]) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(records).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn run<'py>(py: Python<'py>, plan: ExperimentPlan) -> PyResult<Bound<'py, PyAny>> {
    plan.validate().map_err(value_err)?;
    let run = py
        .detach(|| experiments::run_plan(&plan))
        .map_err(value_err)?;
    records_to_py(py, &run.records)
}

/// Spin-1/2 sector sweep; `family` is one of half, half-1, half-2, fixed-m.
#[pyfunction]
#[pyo3(signature = (family, n_min, n_max, theta=DEFAULT_THETA, fixed_m=experiments::DEFAULT_FIXED_M))]
fn spin_half_sweep<'py>(
    py: Python<'py>,
    family: &str,
    n_min: usize,
    n_max: usize,
    theta: f64,
    fixed_m: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let sector = match family {
        "half" => SpinHalfSector::Half,
        "half-1" => SpinHalfSector::HalfMinusOne,
        "half-2" => SpinHalfSector::HalfMinusTwo,
        "fixed-m" => SpinHalfSector::Fixed(fixed_m),
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    };
    run(py, ExperimentPlan::spin_half(sector, n_min, n_max, theta))
}

/// Random spin-1 interactions over the zero-magnetization sectors.
#[pyfunction]
#[pyo3(signature = (n_min, n_max, seed, samples=experiments::DEFAULT_SPIN_ONE_SAMPLES))]
fn spin_one_ensemble<'py>(
    py: Python<'py>,
    n_min: usize,
    n_max: usize,
    seed: u64,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    run(py, ExperimentPlan::spin_one(n_min, n_max, samples, seed))
}

/// GOE matrices sized like the `(N, M)` spin-1/2 sectors.
#[pyfunction]
#[pyo3(signature = (labels, seed, samples=experiments::DEFAULT_GOE_SAMPLES))]
fn goe_baseline<'py>(
    py: Python<'py>,
    labels: Vec<(usize, i64)>,
    seed: u64,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let grid: Vec<GridPoint> = labels
        .into_iter()
        .map(|(chain_length, charge)| GridPoint {
            chain_length,
            charge,
        })
        .collect();
    run(py, ExperimentPlan::goe(&grid, samples, seed))
}

#[pymodule]
pub fn typicality_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_THETA", DEFAULT_THETA)?;
    m.add_class::<PySectorBasis>()?;
    m.add_function(wrap_pyfunction!(sector_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(sector_atypicality, m)?)?;
    m.add_function(wrap_pyfunction!(degeneracy_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(goe_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(spin_half_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(spin_one_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(goe_baseline, m)?)?;
    Ok(())
}
