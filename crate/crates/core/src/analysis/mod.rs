//! Diagnostics computed from greedy runs.
//!
//! A [`RunTrace`] records, for every step `n`, the power value at the next
//! point `nu_n = P_n(x_{n+1})`, the maximal power value `sigma_n`, residual
//! magnitudes and the partial native norm `|s_n|^2`. Everything else in this
//! module is a pure function of traces: inequality checks, rate fits,
//! theoretical bound curves and the closed forms for the 1-D power-law example.

mod appendix;
mod bounds;
mod checks;
mod rates;

pub use appendix::{h_alpha, l1_error_segment};
pub use bounds::{
    bound_algebraic, bound_exponential, greedy_bound_algebraic, greedy_bound_exponential,
    lower_bound_curve, LowerBound,
};
pub use checks::{
    abstract_product_sweep, check_abstract_product_inequality, check_improved_power_estimate,
    check_residual_product_lemma, check_theorem_final, CheckRecord, ABSTRACT_TOL, NORM_SLACK,
    TRACE_TOL,
};
pub use rates::{
    fit_loglog_slope, geometric_mean_series, geometric_mean_window, BoundParams, CheckSummary,
    RateReport, SlopeFit,
};

use crate::error::{invalid, Error, Result};
use crate::greedy::{SelectionVariant, StopReason};

/// One greedy step: the state after `n` points and the choice of `x_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub selected_index: usize,
    pub point: Vec<f64>,
    /// `P_n(x_{n+1})`
    pub nu: f64,
    /// `max_x P_n(x)`
    pub sigma: f64,
    /// `|r_n(x_{n+1})|`
    pub residual_at_selected: f64,
    /// `max_x |r_n(x)|`
    pub max_residual: f64,
    pub criterion_value: f64,
    /// `c_{n+1} = r_n(x_{n+1}) / P_n(x_{n+1})`
    pub coefficient: f64,
    /// `|s_n|^2 = sum_{j <= n} c_j^2`
    pub partial_native_norm: f64,
}

/// State after the last accepted point.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalState {
    pub n: usize,
    pub sigma: f64,
    pub max_residual: f64,
    pub partial_native_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub kernel: String,
    pub rule: SelectionVariant,
    pub seed: Option<u64>,
    pub dim: usize,
    pub candidates: usize,
    /// Selection was restricted to a subset of the candidates.
    pub restricted: bool,
    pub stop_reason: StopReason,
    pub warnings: Vec<String>,
}

/// Full per-iteration record of a greedy run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub meta: TraceMeta,
    pub rows: Vec<TraceRow>,
    pub final_state: FinalState,
}

/// Trace columns that can be extracted by name.
pub const NUMERIC_COLUMNS: [&str; 7] = [
    "nu",
    "sigma",
    "residual_at_selected",
    "max_residual",
    "criterion_value",
    "coefficient",
    "partial_native_norm",
];

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ns(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn nu(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.nu).collect()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sigma).collect()
    }

    pub fn max_residual(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.max_residual).collect()
    }

    pub fn residual_at_selected(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual_at_selected).collect()
    }

    /// Column by its CSV name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let pick: fn(&TraceRow) -> f64 = match name {
            "nu" => |r| r.nu,
            "sigma" => |r| r.sigma,
            "residual_at_selected" => |r| r.residual_at_selected,
            "max_residual" => |r| r.max_residual,
            "criterion_value" => |r| r.criterion_value,
            "coefficient" => |r| r.coefficient,
            "partial_native_norm" => |r| r.partial_native_norm,
            other => return Err(invalid(format!("unknown trace column `{other}`"))),
        };
        Ok(self.rows.iter().map(pick).collect())
    }

    /// `|s_i|^2` for `0 <= i <= len`; `i == len` is the final state.
    pub fn partial_native_norm_at(&self, i: usize) -> Option<f64> {
        match i.cmp(&self.rows.len()) {
            std::cmp::Ordering::Less => Some(self.rows[i].partial_native_norm),
            std::cmp::Ordering::Equal => Some(self.final_state.partial_native_norm),
            std::cmp::Ordering::Greater => None,
        }
    }

    /// `|r_i|_H^2 = |f|_H^2 - |s_i|^2`.
    ///
    /// Evaluated as `sum_{j > i} c_j^2 + max(|f|^2 - |s_N|^2, 0)` with `N` the
    /// final step, which avoids cancelling `|f|^2` against `|s_i|^2` for
    /// every intermediate `i`.
    pub fn residual_norm_sq(&self, i: usize, f_norm_sq: f64) -> Result<f64> {
        let partial = self
            .partial_native_norm_at(i)
            .ok_or_else(|| invalid(format!("trace has no step {i}")))?;
        if f_norm_sq < partial - NORM_SLACK {
            return Err(Error::InconsistentNorm { f_norm_sq, partial });
        }
        let tail: f64 = self.rows[i..]
            .iter()
            .map(|r| r.coefficient * r.coefficient)
            .sum();
        let rest = (f_norm_sq - self.final_state.partial_native_norm).max(0.0);
        Ok(tail + rest)
    }

    /// Index `i*` in `n+1..=2n` with the smallest `P_i(x_{i+1})`, i.e. the
    /// interpolant with the smallest improved power estimate.
    pub fn preferred_interpolant(&self, n: usize) -> Option<usize> {
        if n == 0 || self.rows.len() < 2 * n + 1 {
            return None;
        }
        (n + 1..=2 * n).min_by(|&a, &b| self.rows[a].nu.total_cmp(&self.rows[b].nu))
    }
}
