use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Family, ResultRecord};

pub const SUMMARY_HEADER: &str =
    "family,N,charge,D,delta_mean,delta_std,delta_stderr,fdeg_mean,samples";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AggregateError {
    #[error("no records to aggregate")]
    Empty,
}

/// Per-sector statistics over the successful records of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: Family,
    #[serde(rename = "N")]
    pub chain_length: usize,
    pub charge: i64,
    #[serde(rename = "D")]
    pub dimension: u64,
    pub delta_mean: f64,
    /// Sample standard deviation; undefined for a single sample.
    pub delta_std: Option<f64>,
    pub delta_stderr: Option<f64>,
    pub fdeg_mean: Option<f64>,
    pub samples: usize,
}

/// Groups records by (family, N, charge, D) in that order. Failed records are
/// skipped.
pub fn aggregate(records: &[ResultRecord]) -> Result<Vec<SummaryRow>, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::Empty);
    }
    let mut groups: BTreeMap<(Family, usize, i64, u64), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        groups
            .entry((r.family, r.chain_length, r.charge, r.dimension))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((family, chain_length, charge, dimension), group)| {
            let deltas: Vec<f64> = group.iter().filter_map(|r| r.delta_rms).collect();
            let n = deltas.len();
            let delta_mean = deltas.iter().sum::<f64>() / n as f64;
            let delta_std = (n > 1).then(|| {
                (deltas.iter().map(|d| (d - delta_mean).powi(2)).sum::<f64>() / (n - 1) as f64)
                    .sqrt()
            });
            let delta_stderr = delta_std.map(|s| s / (n as f64).sqrt());
            let fdegs: Vec<f64> = group.iter().filter_map(|r| r.f_deg).collect();
            let fdeg_mean =
                (!fdegs.is_empty()).then(|| fdegs.iter().sum::<f64>() / fdegs.len() as f64);
            SummaryRow {
                family,
                chain_length,
                charge,
                dimension,
                delta_mean,
                delta_std,
                delta_stderr,
                fdeg_mean,
                samples: n,
            }
        })
        .collect())
}

fn field(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// CSV with [`SUMMARY_HEADER`]; undefined statistics are empty fields.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.family.name(),
            r.chain_length,
            r.charge,
            r.dimension,
            field(Some(r.delta_mean)),
            field(r.delta_std),
            field(r.delta_stderr),
            field(r.fdeg_mean),
            r.samples
        )?;
    }
    Ok(())
}
