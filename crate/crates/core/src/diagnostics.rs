//! Comparison metrics computed from a [`RunResult`].
//!
//! Sample matrices are flat row-major slices with `dim` columns. Burn-in is
//! applied here and never during sampling.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::squared_distance;
use crate::samplers::RunResult;
use crate::targets::Target;
use crate::{Error, Result};

/// Summary of one run after burn-in.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsReport {
    /// Main-chain acceptance over retained iterations.
    pub acceptance_rate: f64,
    pub accepted: u64,
    pub attempted: u64,
    /// Mean squared jump distance.
    pub esjd: f64,
    pub mean_error: f64,
    pub second_moment_error: Option<f64>,
    pub mode_visits: Option<BTreeMap<String, u64>>,
    pub left_fraction: Option<f64>,
    pub n_used: usize,
    /// Acceptance of the non-adaptive phase, for the finite variants.
    pub phase2_acceptance_rate: Option<f64>,
    /// Whole-run acceptance of every chain the sampler kept
    /// (main first, then scout or tempered chains).
    pub chain_acceptance: Vec<f64>,
}

/// Knobs for [`report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub burn_in: usize,
    /// Radius for mode attribution; `None` skips mode counting.
    pub mode_radius: Option<f64>,
    pub left_fraction: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            burn_in: 0,
            mode_radius: None,
            left_fraction: false,
        }
    }
}

fn rows(samples: &[f64], dim: usize) -> core::slice::ChunksExact<'_, f64> {
    samples.chunks_exact(dim.max(1))
}

/// Mean squared Euclidean jump between consecutive retained rows.
pub fn esjd(samples: &[f64], dim: usize, burn_in: usize) -> Result<f64> {
    let n = samples.len() / dim.max(1);
    let used = n.saturating_sub(burn_in);
    if used < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: used });
    }
    let retained = &samples[burn_in * dim..n * dim];
    let mut it = rows(retained, dim);
    let mut prev = it.next().unwrap_or(&[]);
    let mut total = 0.0;
    for row in it {
        total += squared_distance(prev, row);
        prev = row;
    }
    Ok(total / (used - 1) as f64)
}

/// Column means of `samples` restricted to `coords`.
fn column_moments(samples: &[f64], dim: usize, coords: core::ops::Range<usize>) -> (Vec<f64>, Vec<f64>) {
    let k = coords.len();
    let mut m1 = alloc::vec![0.0; k];
    let mut m2 = alloc::vec![0.0; k];
    let mut n = 0usize;
    for row in rows(samples, dim) {
        n += 1;
        for (j, c) in coords.clone().enumerate() {
            m1[j] += row[c];
            m2[j] += row[c] * row[c];
        }
    }
    let n = n.max(1) as f64;
    m1.iter_mut().for_each(|v| *v /= n);
    m2.iter_mut().for_each(|v| *v /= n);
    (m1, m2)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Distances from the empirical first and elementwise second moments to the
/// target's declared values. `None` when the target declares no mean.
pub fn moment_errors<T: Target + ?Sized>(
    samples: &[f64],
    dim: usize,
    target: &T,
) -> Option<(f64, Option<f64>)> {
    let mean = target.true_mean()?;
    let coords = target.moment_coordinates();
    let (m1, m2) = column_moments(samples, dim, coords);
    let mean_error = euclidean(&m1, &mean);
    let second = target.true_second_moment().map(|s| euclidean(&m2, &s));
    Some((mean_error, second))
}

/// Identifier used for mode `i` in reports.
pub fn mode_id(i: usize) -> String {
    format!("mode_{i}")
}

/// Number of rows within `radius` of each mode.
pub fn mode_visits(samples: &[f64], dim: usize, modes: &[Vec<f64>], radius: f64) -> BTreeMap<String, u64> {
    let r2 = radius * radius;
    let mut counts = alloc::vec![0u64; modes.len()];
    for row in rows(samples, dim) {
        for (c, m) in counts.iter_mut().zip(modes) {
            if squared_distance(row, m) <= r2 {
                *c += 1;
            }
        }
    }
    counts.into_iter().enumerate().map(|(i, c)| (mode_id(i), c)).collect()
}

/// Fraction of rows whose first coordinate is negative.
pub fn left_fraction(samples: &[f64], dim: usize) -> f64 {
    let mut n = 0usize;
    let mut left = 0usize;
    for row in rows(samples, dim) {
        n += 1;
        if row[0] < 0.0 {
            left += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        left as f64 / n as f64
    }
}

/// `(accepted, attempted)` over a slice of indicators.
pub fn acceptance_counts(accepted: &[bool]) -> (u64, u64) {
    let a = accepted.iter().filter(|&&b| b).count() as u64;
    (a, accepted.len() as u64)
}

fn rate(a: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        a as f64 / n as f64
    }
}

/// Builds the full report for `result` against `target`.
pub fn report<T: Target + ?Sized>(
    result: &RunResult,
    target: &T,
    options: &ReportOptions,
) -> Result<DiagnosticsReport> {
    let dim = result.dim;
    let burn_in = options.burn_in.min(result.len());
    let retained = result.retained(burn_in);
    let n_used = result.len() - burn_in;
    let esjd = esjd(&result.samples, dim, burn_in)?;
    let (accepted, attempted) = acceptance_counts(&result.accepted[burn_in..]);
    let (mean_error, second_moment_error) = match moment_errors(retained, dim, target) {
        Some((m, s)) => (m, s),
        None => (f64::NAN, None),
    };
    let mode_visits = options.mode_radius.and_then(|r| {
        let modes = target.modes();
        (!modes.is_empty()).then(|| mode_visits(retained, dim, &modes, r))
    });
    let left_fraction = options.left_fraction.then(|| left_fraction(retained, dim));
    let phase2_acceptance_rate = result.phase_boundary.map(|f| {
        let (a, n) = acceptance_counts(&result.accepted[f.min(result.len())..]);
        rate(a, n)
    });
    let chain_acceptance = result.final_state.tallies.iter().map(|t| t.rate()).collect();
    Ok(DiagnosticsReport {
        acceptance_rate: rate(accepted, attempted),
        accepted,
        attempted,
        esjd,
        mean_error,
        second_moment_error,
        mode_visits,
        left_fraction,
        n_used,
        phase2_acceptance_rate,
        chain_acceptance,
    })
}
