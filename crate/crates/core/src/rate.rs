//! Log-log rate fitting for error-versus-order sweeps.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean squared residual of the log-log fit.
    pub residual: f64,
    /// Number of distinct orders used.
    pub points: usize,
}

/// Mean error per order, in increasing order of `k`.
pub fn mean_by_order(records: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut groups: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for &(k, e) in records {
        let entry = groups.entry(k).or_insert((0.0, 0));
        entry.0 += e;
        entry.1 += 1;
    }
    groups.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
}

/// Least-squares slope of `ln(mean error)` against `ln(k)`, using the orders
/// whose mean error is positive. At least three such orders are required.
pub fn fit_rate(records: &[(usize, f64)]) -> Result<RateFit> {
    let points: Vec<(f64, f64)> = mean_by_order(records)
        .into_iter()
        .filter(|&(k, m)| k > 0 && m > 0.0 && m.is_finite())
        .map(|(k, m)| (libm::log(k as f64), libm::log(m)))
        .collect();
    if points.len() < 3 {
        return Err(Error::RateUndefined("need at least three orders with positive mean error"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| p.1 - intercept - slope * p.0).map(|r| r * r).sum();
    Ok(RateFit { slope, intercept, residual: libm::sqrt(sse / n), points: points.len() })
}
