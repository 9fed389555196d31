//! Acceptance criteria, run as one binary so every criterion prints a single
//! PASS/FAIL line in order. Sweeps shared by several criteria run once.
//!
//! Run alone with `cargo test -p typicality --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;

use typicality::experiments::{
    aggregate, fit_power_law, fit_summary, run_goe_baseline, run_spin_half_sweep,
    run_spin_one_ensemble, ExperimentPlan, GridPoint, ResultRecord, SpinHalfSector, SummaryRow,
};
use typicality::hamiltonian::project_onto_sector;
use typicality::rng::seeded_rng;
use typicality::spectra::eigenvalues_symmetric;
use typicality::{
    atypicality, build_full_hamiltonian_oracle, build_sector_hamiltonian, degeneracy_fraction,
    eig_symmetric, microcanonical_reference, reduced_populations, sample_goe,
    sample_spin_one_interaction, ChainSpec, LocalDimension, SectorBasis, DEFAULT_THETA,
};

/// Master seeds, fixed before any ensemble was run.
const GOE_SEED: u64 = 1;
const SPIN_ONE_SEED: u64 = 1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut out = f();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                out.passed = false;
                out.detail = format!("{}; exceeded {:?}", out.detail, limit);
            }
        }
        if !out.passed {
            self.failures += 1;
        }
        println!(
            "[{}] criterion {id:>2} {name} ({:.1}s): {}",
            if out.passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
}

fn minutes(m: u64) -> Option<Duration> {
    Some(Duration::from_secs(60 * m))
}

fn curve(records: &[ResultRecord]) -> Vec<(u64, f64, Option<f64>)> {
    let mut pts: Vec<_> = records
        .iter()
        .map(|r| (r.dimension, r.delta_rms.unwrap_or(f64::NAN), r.f_deg))
        .collect();
    pts.sort_by_key(|p| p.0);
    pts
}

fn rises(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

fn sector_delta(n: usize, m: usize) -> f64 {
    let spec = ChainSpec::spin_half(n, DEFAULT_THETA);
    let basis = Arc::new(SectorBasis::new(n, LocalDimension::SpinHalf, m as i64).unwrap());
    let h = build_sector_hamiltonian(&spec, basis.clone()).unwrap();
    let eig = eig_symmetric(&h.matrix).unwrap();
    atypicality(&eig, &basis).unwrap().delta_rms
}

fn half_filling() -> Outcome {
    let mut worst = 0.0f64;
    for n in [4, 6, 8, 10, 12] {
        worst = worst.max(sector_delta(n, n / 2));
    }
    outcome(
        worst < 1e-10,
        format!("max delta_rms {worst:.2e} (< 1e-10)"),
    )
}

fn counting_identity() -> Outcome {
    let mut sectors = 0;
    let mut worst = 0.0f64;
    for n in 2..=14usize {
        for m in 1..n {
            let basis = SectorBasis::new(n, LocalDimension::SpinHalf, m as i64).unwrap();
            let reference = microcanonical_reference(&basis);
            if reference.rational(1) != Ratio::new(m as u64, n as u64) {
                return outcome(false, format!("reference p[up] != {m}/{n}"));
            }
            let d = basis.dimension();
            let uniform = vec![1.0 / (d as f64).sqrt(); d];
            for site in 0..n {
                let p = reduced_populations(&uniform, &basis, site).unwrap();
                worst = worst.max((p.populations[1] - m as f64 / n as f64).abs());
            }
            sectors += 1;
        }
    }
    outcome(
        worst < 1e-12,
        format!("{sectors} sectors exact; uniform-vector error {worst:.2e} (< 1e-12)"),
    )
}

fn projection_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut blocks = 0;
    let mut compare = |spec: &ChainSpec, charges: &[i64]| {
        let full = build_full_hamiltonian_oracle(spec).unwrap();
        for &c in charges {
            let basis =
                Arc::new(SectorBasis::new(spec.chain_length, spec.local_dimension(), c).unwrap());
            let projected = project_onto_sector(&full, &basis);
            let block = build_sector_hamiltonian(spec, basis).unwrap();
            let diff = projected
                .as_slice()
                .iter()
                .zip(block.matrix.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(diff);
            blocks += 1;
        }
    };
    let mut rng = seeded_rng(3);
    for n in 2..=10usize {
        let charges: Vec<i64> = (0..=n as i64).collect();
        for theta in [
            DEFAULT_THETA,
            0.0,
            rng.random_range(0.0..std::f64::consts::PI),
        ] {
            compare(&ChainSpec::spin_half(n, theta), &charges);
        }
    }
    for n in 2..=6usize {
        for _ in 0..4 {
            compare(
                &ChainSpec::spin_one(n, sample_spin_one_interaction(&mut rng)),
                &[0],
            );
        }
    }
    outcome(
        worst <= 1e-12,
        format!("{blocks} blocks, max |difference| {worst:.2e} (<= 1e-12)"),
    )
}

fn eigensolver_contract() -> Outcome {
    let mut rng = seeded_rng(4);
    let mut worst_res = 0.0f64;
    let mut worst_orth = 0.0f64;
    let mut worst_rec = 0.0f64;
    let mut worst_trace = 0.0f64;
    let sizes = [16usize; 40].into_iter().chain([128; 40]).chain([1024; 20]);
    let mut count = 0;
    for d in sizes {
        let h = sample_goe(d, &mut rng).unwrap();
        let norm = h.frobenius_norm();
        let eig = eig_symmetric(&h).unwrap();
        worst_res = worst_res.max(eig.max_residual(&h) / norm);
        let (orth, rec) = if d <= 128 {
            let pairs = (0..d).flat_map(|j| (j..d).map(move |k| (j, k)));
            let rec = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| (eig.reconstruct_entry(i, j) - h[(i, j)]).abs())
                .fold(0.0, f64::max);
            (eig.max_orthonormality_error(pairs), rec)
        } else {
            let pairs: Vec<(usize, usize)> = (0..d)
                .map(|j| (j, j))
                .chain((0..4000).map(|_| (rng.random_range(0..d), rng.random_range(0..d))))
                .collect();
            let rec = (0..2000)
                .map(|_| (rng.random_range(0..d), rng.random_range(0..d)))
                .map(|(i, j)| (eig.reconstruct_entry(i, j) - h[(i, j)]).abs())
                .fold(0.0, f64::max);
            (eig.max_orthonormality_error(pairs), rec)
        };
        worst_orth = worst_orth.max(orth);
        worst_rec = worst_rec.max(rec / norm);
        let trace_err = (eig.eigenvalues().iter().sum::<f64>() - h.trace()).abs() / norm;
        worst_trace = worst_trace.max(trace_err);
        count += 1;
    }
    let ok = worst_res <= 1e-9 && worst_orth <= 1e-9 && worst_rec <= 1e-9 && worst_trace <= 1e-9;
    outcome(
        ok,
        format!(
            "{count} matrices; residual/|H|_F {worst_res:.1e}, orthonormality {worst_orth:.1e}, \
             reconstruction/|H|_F {worst_rec:.1e}, trace/|H|_F {worst_trace:.1e} (all <= 1e-9)"
        ),
    )
}

fn goe_scaling(rows: &[SummaryRow]) -> Outcome {
    let fit = match fit_summary(rows, false) {
        Ok(f) => f,
        Err(e) => return outcome(false, e.to_string()),
    };
    let slope = fit.slope();
    let stds: Vec<String> = rows
        .iter()
        .map(|r| format!("{}:{:.2e}", r.dimension, r.delta_std.unwrap_or(f64::NAN)))
        .collect();
    outcome(
        (slope + 0.5).abs() <= 0.05,
        format!(
            "slope {slope:.4} +/- {:.4} (target -0.5 +/- 0.05); sample std by D [{}]",
            fit.exponent_stderr.unwrap_or(f64::NAN),
            stds.join(", ")
        ),
    )
}

fn spin_half_trend(families: &[(&str, Vec<ResultRecord>)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, records) in families {
        let pts = curve(records);
        let deltas: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let decreasing = deltas.windows(2).all(|w| w[1] < w[0]);
        let points: Vec<(f64, f64)> = pts.iter().map(|p| (p.0 as f64, p.1)).collect();
        let alpha = fit_power_law(&points, &[])
            .map(|f| f.exponent)
            .unwrap_or(f64::NAN);
        ok &= decreasing && alpha.abs() < 0.5;
        parts.push(format!(
            "{name}: {} alpha {alpha:.3}",
            if decreasing {
                "decreasing"
            } else {
                "NOT decreasing"
            }
        ));
    }
    outcome(ok, format!("{} (|alpha| < 0.5)", parts.join("; ")))
}

fn fixed_m_plateau(records: &[ResultRecord]) -> Outcome {
    let deltas: Vec<f64> = curve(records).iter().map(|p| p.1).collect();
    if deltas.len() != 3 || deltas.iter().any(|d| !d.is_finite()) {
        return outcome(false, format!("expected 3 finite points, got {deltas:?}"));
    }
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let in_band = deltas.iter().all(|d| (0.30..=0.55).contains(d));
    // reference digits for N = 13, 14, 15, printed with an exponent that
    // cannot be right (delta <= 1); report the closest decade
    let digits = [399.0, 415.0, 448.0];
    let ratio = deltas.iter().zip(digits).map(|(d, r)| d / r).sum::<f64>() / 3.0;
    let decade = ratio.log10().round() as i32;
    let worst = deltas
        .iter()
        .zip(digits)
        .map(|(d, r)| (d / (r * 10f64.powi(decade)) - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        in_band && spread < 0.15,
        format!(
            "delta {:?} in [0.30, 0.55], spread (max-min)/min {spread:.3} (< 0.15); \
             reference digits (399, 415, 448) x 1e{decade} match within {:.1}%",
            deltas.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>(),
            100.0 * worst
        ),
    )
}

// Longest-run variant of f_deg, printed only as a diagnostic.
fn consecutive_fdeg(records: &[ResultRecord]) -> Vec<f64> {
    let mut pts: Vec<&ResultRecord> = records.iter().collect();
    pts.sort_by_key(|r| r.dimension);
    pts.iter()
        .map(|r| {
            let spec = ChainSpec::spin_half(r.chain_length, r.theta.unwrap_or(DEFAULT_THETA));
            let basis = Arc::new(
                SectorBasis::new(r.chain_length, LocalDimension::SpinHalf, r.charge).unwrap(),
            );
            let h = build_sector_hamiltonian(&spec, basis).unwrap();
            let values = eigenvalues_symmetric(&h.matrix).unwrap();
            degeneracy_fraction(&values).unwrap().consecutive_fraction()
        })
        .collect()
}

fn fdeg_trend(families: &[(&str, Vec<ResultRecord>)], spin_one: &[SummaryRow]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (name, records) in families {
        let f: Vec<f64> = curve(records)
            .iter()
            .map(|p| p.2.unwrap_or(f64::NAN))
            .collect();
        let r = rises(&f);
        ok &= r <= 1 && f.iter().all(|x| x.is_finite());
        let alt = consecutive_fdeg(records);
        parts.push(format!(
            "{name}: [{}] rises {r} (longest-run variant [{}] rises {})",
            fmt(&f),
            fmt(&alt),
            rises(&alt)
        ));
    }
    let mut rows: Vec<&SummaryRow> = spin_one.iter().collect();
    rows.sort_by_key(|r| r.dimension);
    let f: Vec<f64> = rows
        .iter()
        .map(|r| r.fdeg_mean.unwrap_or(f64::NAN))
        .collect();
    let r = rises(&f);
    ok &= r <= 1 && f.iter().all(|x| x.is_finite());
    parts.push(format!("spin-1 mean: [{}] rises {r}", fmt(&f)));
    outcome(ok, format!("{} (at most 1 rise each)", parts.join("; ")))
}

fn spin_one_power_law(records: &[ResultRecord], rows: &[SummaryRow], samples: usize) -> Outcome {
    let fit = match fit_summary(rows, true) {
        Ok(f) => f,
        Err(e) => return outcome(false, e.to_string()),
    };
    let delta = |s: usize, n: usize| {
        records
            .iter()
            .find(|r| r.sample == s && r.chain_length == n)
            .and_then(|r| r.delta_rms)
    };
    let improving = (0..samples)
        .filter(|&s| matches!((delta(s, 6), delta(s, 9)), (Some(a), Some(b)) if b < a))
        .count();
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    outcome(
        (0.10..=0.30).contains(&fit.exponent) && improving >= 14 && failed == 0,
        format!(
            "alpha {:.4} +/- {:.4} in [0.10, 0.30] over {} points; {improving}/{samples} samples with \
             delta(9) < delta(6) (>= 14); {failed} failed records",
            fit.exponent,
            fit.exponent_stderr.unwrap_or(f64::NAN),
            fit.points_used
        ),
    )
}

fn fit_exactness() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        ..Config::default()
    });
    let strategy = (
        0.01f64..2.0,
        0.01f64..100.0,
        prop::collection::btree_set(2u32..1_000_000, 2..10),
    );
    let result = runner.run(&strategy, |(alpha, prefactor, dims)| {
        let pts: Vec<(f64, f64)> = dims
            .iter()
            .map(|&d| (d as f64, prefactor * (d as f64).powf(-alpha)))
            .collect();
        let fit = fit_power_law(&pts, &[]).unwrap();
        prop_assert!(((fit.exponent - alpha) / alpha).abs() < 1e-10);
        Ok(())
    });
    match result {
        Ok(()) => outcome(
            true,
            "1000 synthetic power laws, relative exponent error < 1e-10",
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn sum_rule(sets: &[&[ResultRecord]]) -> Outcome {
    let mut worst = 0.0f64;
    let mut sectors = 0;
    let mut missing = 0;
    for r in sets.iter().flat_map(|s| s.iter()) {
        match r.sum_rule_residual {
            Some(x) => worst = worst.max(x),
            None => missing += 1,
        }
        sectors += 1;
    }
    outcome(
        worst < 1e-9 && missing == 0,
        format!("{sectors} sectors, max |sum_n delta_jn| {worst:.2e} (< 1e-9), {missing} missing"),
    )
}

fn main() -> ExitCode {
    // libtest-style flags (--nocapture, filters) are accepted and ignored
    let mut suite = Suite { failures: 0 };
    println!("running acceptance criteria");

    suite.run(1, "half-filling exactness", minutes(1), half_filling);
    suite.run(
        2,
        "micro-canonical counting identity",
        None,
        counting_identity,
    );
    suite.run(
        3,
        "projection-oracle equivalence",
        minutes(5),
        projection_oracle,
    );
    suite.run(4, "eigensolver contract", minutes(5), eigensolver_contract);

    let mut goe_rows = Vec::new();
    suite.run(5, "GOE scaling", minutes(30), || {
        let labels: Vec<GridPoint> = [(8, 4), (10, 5), (12, 6), (14, 7)]
            .into_iter()
            .map(|(chain_length, charge)| GridPoint {
                chain_length,
                charge,
            })
            .collect();
        match run_goe_baseline(&ExperimentPlan::goe(&labels, 50, GOE_SEED)) {
            Ok(run) => {
                goe_rows = run.curve;
                goe_scaling(&goe_rows)
            }
            Err(e) => outcome(false, e.to_string()),
        }
    });

    let mut families: Vec<(&str, Vec<ResultRecord>)> = Vec::new();
    suite.run(6, "spin-half sector trend", minutes(20), || {
        for (name, sector) in [
            ("M=trunc(N/2)", SpinHalfSector::Half),
            ("M=trunc(N/2)-1", SpinHalfSector::HalfMinusOne),
            ("M=trunc(N/2)-2", SpinHalfSector::HalfMinusTwo),
        ] {
            let plan = ExperimentPlan::spin_half(sector, 5, 13, DEFAULT_THETA);
            families.push((name, run_spin_half_sweep(&plan).unwrap_or_default()));
        }
        spin_half_trend(&families)
    });

    let mut fixed = Vec::new();
    suite.run(7, "fixed-M plateau", minutes(15), || {
        let plan = ExperimentPlan::spin_half(SpinHalfSector::Fixed(6), 13, 15, DEFAULT_THETA);
        fixed = run_spin_half_sweep(&plan).unwrap_or_default();
        fixed_m_plateau(&fixed)
    });

    let samples = 21;
    let plan = ExperimentPlan::spin_one(6, 9, samples, SPIN_ONE_SEED);
    let mut spin_one = Vec::new();
    let mut spin_one_rows = Vec::new();
    suite.run(
        9,
        "spin-1 ensemble power law",
        minutes(60),
        || match run_spin_one_ensemble(&plan) {
            Ok(run) => {
                spin_one = run.records;
                spin_one_rows = aggregate(&spin_one).unwrap_or_default();
                spin_one_power_law(&spin_one, &spin_one_rows, samples)
            }
            Err(e) => outcome(false, e.to_string()),
        },
    );

    suite.run(8, "degeneracy-fraction trend", None, || {
        fdeg_trend(&families, &spin_one_rows)
    });
    suite.run(10, "fit machinery exactness", None, fit_exactness);

    let spin_half: Vec<ResultRecord> = families
        .iter()
        .flat_map(|(_, r)| r.iter().cloned())
        .collect();
    suite.run(11, "sum-rule consistency", None, || {
        sum_rule(&[&spin_half, &spin_one])
    });

    println!("acceptance: {} of 11 criteria passed", 11 - suite.failures);
    if suite.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
