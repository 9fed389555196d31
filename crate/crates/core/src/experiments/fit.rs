use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SummaryRow;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 2 included points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} has non-positive or non-finite coordinates ({dimension}, {delta})")]
    NonPositive {
        index: usize,
        dimension: f64,
        delta: f64,
    },
    #[error("all included points share one dimension")]
    Degenerate,
}

/// Ordinary least squares of `ln delta` on `ln D`; `delta ~ D^(-exponent)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// Undefined with exactly two points.
    pub exponent_stderr: Option<f64>,
    pub intercept: f64,
    pub points_used: usize,
    pub excluded_points: Vec<usize>,
}

impl ScalingFit {
    pub fn slope(&self) -> f64 {
        -self.exponent
    }
}

/// Fits `points = [(D, delta), ...]`, skipping the indices in `exclude`.
pub fn fit_power_law(points: &[(f64, f64)], exclude: &[usize]) -> Result<ScalingFit, FitError> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for (index, &(dimension, delta)) in points.iter().enumerate() {
        if exclude.contains(&index) {
            continue;
        }
        if !(dimension > 0.0 && delta > 0.0 && dimension.is_finite() && delta.is_finite()) {
            return Err(FitError::NonPositive {
                index,
                dimension,
                delta,
            });
        }
        xs.push(dimension.ln());
        ys.push(delta.ln());
    }
    let n = xs.len();
    if n < 2 {
        return Err(FitError::TooFewPoints(n));
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let exponent_stderr = (n > 2).then(|| {
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (ssr / (nf - 2.0) / sxx).sqrt()
    });
    let mut excluded_points: Vec<usize> = exclude
        .iter()
        .copied()
        .filter(|&i| i < points.len())
        .collect();
    excluded_points.sort_unstable();
    excluded_points.dedup();
    Ok(ScalingFit {
        exponent: -slope,
        exponent_stderr,
        intercept,
        points_used: n,
        excluded_points,
    })
}

/// Fits the mean atypicality of summary rows, ordered by dimension.
pub fn fit_summary(rows: &[SummaryRow], exclude_first: bool) -> Result<ScalingFit, FitError> {
    let mut points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.dimension as f64, r.delta_mean))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let exclude: &[usize] = if exclude_first { &[0] } else { &[] };
    fit_power_law(&points, exclude)
}
