//! Geometric-mean windows and empirical convergence rates.

use std::collections::BTreeMap;

use super::bounds::{bound_algebraic, bound_exponential};
use super::{CheckRecord, RunTrace};
use crate::error::{invalid, Result};

/// `(prod_{i=n+1}^{2n} seq[i])^(1/n)` with 0-based indices, evaluated in log space.
pub fn geometric_mean_window(seq: &[f64], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("window size n must be at least 1"));
    }
    if seq.len() < 2 * n + 1 {
        return Err(invalid(format!(
            "sequence has {} entries, window n = {n} needs {}",
            seq.len(),
            2 * n + 1
        )));
    }
    let window = &seq[n + 1..=2 * n];
    if let Some(v) = window.iter().find(|v| !(**v >= 0.0)) {
        return Err(invalid(format!("negative or NaN entry {v} in window")));
    }
    if window.contains(&0.0) {
        return Ok(0.0);
    }
    let mean_log = window.iter().map(|v| v.ln()).sum::<f64>() / n as f64;
    Ok(mean_log.exp())
}

/// `(n, geometric_mean_window(seq, n))` for every admissible `n >= 1`.
pub fn geometric_mean_series(seq: &[f64]) -> Result<Vec<(usize, f64)>> {
    (1..)
        .take_while(|n| 2 * n < seq.len())
        .map(|n| Ok((n, geometric_mean_window(seq, n)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    /// Natural-log intercept: `ln value ~ intercept + slope ln n`.
    pub intercept: f64,
    pub window: (usize, usize),
    pub used: usize,
    /// Points in the window dropped for being nonpositive or non-finite.
    pub skipped: usize,
}

/// Least-squares fit of `ln value` against `ln n` for `lo <= n <= hi`.
pub fn fit_loglog_slope(ns: &[usize], values: &[f64], window: (usize, usize)) -> Result<SlopeFit> {
    if ns.len() != values.len() {
        return Err(invalid("ns and values differ in length"));
    }
    let (lo, hi) = window;
    if lo == 0 || lo > hi {
        return Err(invalid(format!("bad window {lo}:{hi}")));
    }
    let mut skipped = 0;
    let mut pts = Vec::new();
    for (&n, &v) in ns.iter().zip(values) {
        if n < lo || n > hi {
            continue;
        }
        if v > 0.0 && v.is_finite() {
            pts.push(((n as f64).ln(), v.ln()));
        } else {
            skipped += 1;
        }
    }
    if pts.len() < 3 {
        return Err(invalid(format!(
            "only {} usable points in window {lo}:{hi} ({skipped} skipped)",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("all points share the same n"));
    }
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        window,
        used: pts.len(),
        skipped,
    })
}

/// User-supplied Kolmogorov-width model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundParams {
    /// `d_n <= C0 n^-alpha`
    Algebraic { alpha: f64, c0_big: f64 },
    /// `d_n <= C0 exp(-c0 n^alpha)`
    Exponential { alpha: f64, c0: f64, c0_big: f64 },
}

impl BoundParams {
    /// Bound on the geometric mean of `nu` over the window at `n`.
    pub fn nu_bound(&self, n: usize) -> Result<f64> {
        match *self {
            BoundParams::Algebraic { alpha, c0_big } => bound_algebraic(n, alpha, c0_big),
            BoundParams::Exponential { alpha, c0, c0_big } => {
                bound_exponential(n, alpha, c0, c0_big)
            }
        }
    }

    fn min_n(&self) -> usize {
        match self {
            BoundParams::Algebraic { .. } => 3,
            BoundParams::Exponential { .. } => 2,
        }
    }
}

/// Aggregate of all records sharing a check name.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub name: String,
    pub n_range: (usize, usize),
    pub count: usize,
    pub max_violation: f64,
    pub pass: bool,
}

impl CheckSummary {
    pub fn from_records(records: &[CheckRecord]) -> Vec<CheckSummary> {
        let mut by_name: BTreeMap<&str, CheckSummary> = BTreeMap::new();
        for r in records {
            let s = by_name.entry(&r.name).or_insert_with(|| CheckSummary {
                name: r.name.clone(),
                n_range: (r.n, r.n),
                count: 0,
                max_violation: 0.0,
                pass: true,
            });
            s.n_range = (s.n_range.0.min(r.n), s.n_range.1.max(r.n));
            s.count += 1;
            s.max_violation = s.max_violation.max(r.violation());
            s.pass &= r.pass;
        }
        by_name.into_values().collect()
    }
}

/// Rate summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub label: String,
    pub nu_windows: Vec<(usize, f64)>,
    pub sigma_windows: Vec<(usize, f64)>,
    pub slope: Option<SlopeFit>,
    pub checks: Vec<CheckSummary>,
    /// `(n, bound on nu_windows at n)`
    pub bound_samples: Vec<(usize, f64)>,
}

impl RateReport {
    pub fn new(label: impl Into<String>, trace: &RunTrace) -> Result<Self> {
        Ok(RateReport {
            label: label.into(),
            nu_windows: geometric_mean_series(&trace.nu())?,
            sigma_windows: geometric_mean_series(&trace.sigma())?,
            slope: None,
            checks: Vec::new(),
            bound_samples: Vec::new(),
        })
    }

    pub fn with_slope(
        mut self,
        trace: &RunTrace,
        column: &str,
        window: (usize, usize),
    ) -> Result<Self> {
        let values = trace.column(column)?;
        self.slope = Some(fit_loglog_slope(&trace.ns(), &values, window)?);
        Ok(self)
    }

    pub fn with_checks(mut self, records: &[CheckRecord]) -> Self {
        self.checks = CheckSummary::from_records(records);
        self
    }

    pub fn with_bound(mut self, params: BoundParams) -> Result<Self> {
        self.bound_samples = self
            .nu_windows
            .iter()
            .filter(|(n, _)| *n >= params.min_n())
            .map(|&(n, _)| Ok((n, params.nu_bound(n)?)))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
