use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{aggregate, ExperimentPlan, Family, GridPoint, PlanError, ResultRecord, SummaryRow};
use crate::basis::{BasisError, LocalDimension, SectorBasis};
use crate::hamiltonian::{
    build_sector_hamiltonian, sample_goe, sample_spin_one_interaction, ChainSpec, InteractionSpec,
};
use crate::rng::{derive_seed, seeded_rng};
use crate::spectra::{eig_symmetric_with_budget, write_spectrum_csv, MemoryBudget, SpectraError};
use crate::typicality::atypicality;

/// Per-sample records plus the per-dimension averages.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub records: Vec<ResultRecord>,
    pub curve: Vec<SummaryRow>,
}

// Admits dense decompositions while their combined footprint fits the budget.
struct MemoryGate {
    budget: Option<u64>,
    in_use: Mutex<u64>,
    freed: Condvar,
}

struct Admission<'a> {
    gate: &'a MemoryGate,
    bytes: u64,
}

impl MemoryGate {
    fn new(budget: MemoryBudget) -> Self {
        Self {
            budget: budget.bytes(),
            in_use: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn admit(&self, dimension: usize) -> Result<Admission<'_>, SpectraError> {
        let bytes = MemoryBudget::required_for(dimension);
        let Some(budget) = self.budget else {
            return Ok(Admission {
                gate: self,
                bytes: 0,
            });
        };
        if bytes > budget {
            return Err(SpectraError::MemoryBudget {
                dimension,
                required: bytes,
                budget,
            });
        }
        let mut in_use = self.in_use.lock().unwrap();
        while *in_use + bytes > budget {
            in_use = self.freed.wait(in_use).unwrap();
        }
        *in_use += bytes;
        Ok(Admission { gate: self, bytes })
    }
}

impl Drop for Admission<'_> {
    fn drop(&mut self) {
        if self.bytes > 0 {
            *self.gate.in_use.lock().unwrap() -= self.bytes;
            self.gate.freed.notify_all();
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    point: GridPoint,
    sample: usize,
}

enum Source {
    Chain(ChainSpec),
    Goe { seed: u64 },
}

fn spec_hash(value: &serde_json::Value) -> String {
    let digest = Sha256::digest(value.to_string().as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn failed_dimension(err: &BasisError) -> u64 {
    match err {
        BasisError::Capacity { dimension, .. } => *dimension,
        _ => 0,
    }
}

fn run_job(plan: &ExperimentPlan, gate: &MemoryGate, job: Job) -> ResultRecord {
    let start = Instant::now();
    let family = plan.family;
    let GridPoint {
        chain_length,
        charge,
    } = job.point;
    let local_dimension = match family {
        Family::SpinOneRandomInteractions => LocalDimension::SpinOne,
        _ => LocalDimension::SpinHalf,
    };

    let (source, seed) = match family {
        Family::SpinHalfSectorSweep | Family::SpinHalfFixedM => (
            Source::Chain(ChainSpec::spin_half(chain_length, plan.theta)),
            None,
        ),
        Family::SpinOneRandomInteractions => {
            // one interaction per sample, shared by every chain length
            let seed = derive_seed(plan.seed, family.name(), job.sample as u64, 0, 0);
            let a = sample_spin_one_interaction(&mut seeded_rng(seed));
            (
                Source::Chain(ChainSpec::spin_one(chain_length, a)),
                Some(seed),
            )
        }
        Family::GoeBaseline => {
            let seed = derive_seed(
                plan.seed,
                family.name(),
                job.sample as u64,
                chain_length as u64,
                charge,
            );
            (Source::Goe { seed }, Some(seed))
        }
    };

    let mut record = ResultRecord {
        family,
        sample: job.sample,
        chain_length,
        local_dim: local_dimension.value(),
        charge,
        dimension: 0,
        theta: None,
        interaction: None,
        seed,
        delta_rms: None,
        f_deg: None,
        mean_gap: None,
        sum_rule_residual: None,
        runtime_seconds: 0.0,
        spec_hash: None,
        error: None,
    };
    let identity = match &source {
        Source::Chain(spec) => {
            match spec.interaction {
                InteractionSpec::SpinHalfAngle { theta } => record.theta = Some(theta),
                InteractionSpec::SpinOneMatrix { a12, a13, a23 } => {
                    record.interaction = Some([a12, a13, a23])
                }
            }
            serde_json::json!({ "family": family, "spec": spec, "charge": charge })
        }
        Source::Goe { seed } => {
            serde_json::json!({ "family": family, "N": chain_length, "charge": charge, "seed": seed })
        }
    };
    record.spec_hash = Some(spec_hash(&identity));

    let outcome = (|| -> Result<(), String> {
        let basis = SectorBasis::new(chain_length, local_dimension, charge).map_err(|e| {
            record.dimension = failed_dimension(&e);
            e.to_string()
        })?;
        let basis = Arc::new(basis);
        record.dimension = basis.dimension() as u64;
        let _admission = gate.admit(basis.dimension()).map_err(|e| e.to_string())?;
        let matrix = match &source {
            Source::Chain(spec) => {
                build_sector_hamiltonian(spec, basis.clone())
                    .map_err(|e| e.to_string())?
                    .matrix
            }
            Source::Goe { seed } => {
                sample_goe(basis.dimension(), &mut seeded_rng(*seed)).map_err(|e| e.to_string())?
            }
        };
        let decomposition = eig_symmetric_with_budget(&matrix, MemoryBudget::unlimited())
            .map_err(|e| e.to_string())?;
        drop(matrix);
        if let Some(dir) = &plan.spectrum_dir {
            let label = if family.is_ensemble() {
                format!("{}-s{}", family.name(), job.sample)
            } else {
                family.name().to_string()
            };
            write_spectrum_csv(
                dir,
                &label,
                chain_length,
                charge,
                decomposition.eigenvalues(),
            )
            .map_err(|e| e.to_string())?;
        }
        let report = atypicality(&decomposition, &basis).map_err(|e| e.to_string())?;
        record.delta_rms = Some(report.delta_rms);
        record.f_deg = report.degeneracy_fraction();
        record.mean_gap = report.mean_gap();
        record.sum_rule_residual = Some(report.sum_rule_residual);
        Ok(())
    })();
    record.error = outcome.err();
    record.runtime_seconds = start.elapsed().as_secs_f64();
    record
}

fn execute(plan: &ExperimentPlan) -> Result<Vec<ResultRecord>, PlanError> {
    plan.validate()?;
    let jobs: Vec<Job> = plan
        .grid
        .iter()
        .flat_map(|&point| (0..plan.samples).map(move |sample| Job { point, sample }))
        .collect();
    let gate = MemoryGate::new(plan.memory_budget);
    // collected in grid order regardless of completion order
    let records = if plan.parallel {
        jobs.par_iter()
            .map(|&job| run_job(plan, &gate, job))
            .collect()
    } else {
        jobs.iter().map(|&job| run_job(plan, &gate, job)).collect()
    };
    Ok(records)
}

fn expect_family(plan: &ExperimentPlan, allowed: &[Family]) -> Result<(), PlanError> {
    if allowed.contains(&plan.family) {
        Ok(())
    } else {
        Err(PlanError::Invalid(format!(
            "plan family {} not handled here",
            plan.family.name()
        )))
    }
}

/// Deterministic spin-1/2 sectors, one record per grid point.
pub fn run_spin_half_sweep(plan: &ExperimentPlan) -> Result<Vec<ResultRecord>, PlanError> {
    expect_family(plan, &[Family::SpinHalfSectorSweep, Family::SpinHalfFixedM])?;
    execute(plan)
}

fn ensemble(plan: &ExperimentPlan) -> Result<EnsembleRun, PlanError> {
    let records = execute(plan)?;
    let curve = aggregate(&records).unwrap_or_default();
    Ok(EnsembleRun { records, curve })
}

/// GOE matrices sized like the labelled spin-1/2 sectors, `samples` per label.
pub fn run_goe_baseline(plan: &ExperimentPlan) -> Result<EnsembleRun, PlanError> {
    expect_family(plan, &[Family::GoeBaseline])?;
    ensemble(plan)
}

/// Random zero-diagonal spin-1 interactions over the zero-magnetization sectors.
pub fn run_spin_one_ensemble(plan: &ExperimentPlan) -> Result<EnsembleRun, PlanError> {
    expect_family(plan, &[Family::SpinOneRandomInteractions])?;
    ensemble(plan)
}

/// Dispatches on the plan family.
pub fn run_plan(plan: &ExperimentPlan) -> Result<EnsembleRun, PlanError> {
    match plan.family {
        Family::SpinHalfSectorSweep | Family::SpinHalfFixedM => {
            let records = run_spin_half_sweep(plan)?;
            let curve = aggregate(&records).unwrap_or_default();
            Ok(EnsembleRun { records, curve })
        }
        Family::GoeBaseline => run_goe_baseline(plan),
        Family::SpinOneRandomInteractions => run_spin_one_ensemble(plan),
    }
}
