//! Incremental greedy kernel interpolation.
//!
//! [`GreedyState`] keeps, for every candidate `x`, the Newton basis values
//! `v_j(x)`, the squared power function `P_n(x)^2` and the residual
//! `r_n(x) = f(x) - s_n(x)`. One step of the greedy loop is
//! [`GreedyState::select_next`] followed by [`GreedyState::newton_update`],
//! which costs `O(N n)` for `N` candidates after `n` steps.
//!
//! The selection scale is `|r_n(x)|^beta * P_n(x)^(1 - beta)`: `beta = 0` is
//! P-greedy, `1/2` is f·P-greedy, `1` is f-greedy, and the limit case
//! `beta = inf` is f/P-greedy, which has its own variant.

mod oracle;

pub use oracle::{interpolant_oracle, power_oracle, DenseInterpolant};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{FinalState, RunTrace, TraceMeta, TraceRow};
use crate::error::{invalid, Error, Result};
use crate::geometry::CandidateSet;
use crate::kernels::KernelModel;

/// Default eligibility threshold on `P_n(x)^2`.
pub const DEFAULT_POWER_FLOOR: f64 = 1e-13;

/// Slack allowed on `k(x, x) <= 1` before a normalization warning is raised.
const NORMALIZATION_SLACK: f64 = 1e-12;

const CHUNK: usize = 2048;

/// Point selection strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionVariant {
    /// `argmax |r_n|^beta * P_n^(1 - beta)`, `beta >= 0`.
    Beta(f64),
    /// `argmax |r_n| / P_n`, the `beta -> inf` limit.
    FOverP,
    /// Uniformly random eligible candidate, ignoring all scores.
    Random { seed: u64 },
}

impl SelectionVariant {
    /// Effective `beta`; `f64::INFINITY` for f/P and `None` for random picks.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            SelectionVariant::Beta(b) => Some(b),
            SelectionVariant::FOverP => Some(f64::INFINITY),
            SelectionVariant::Random { .. } => None,
        }
    }
}

impl fmt::Display for SelectionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionVariant::Beta(b) => write!(f, "beta:{b}"),
            SelectionVariant::FOverP => write!(f, "f_over_p"),
            SelectionVariant::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for SelectionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "f_over_p" {
            return Ok(SelectionVariant::FOverP);
        }
        if let Some(b) = s.strip_prefix("beta:") {
            let b: f64 = b
                .parse()
                .map_err(|_| Error::Parse(format!("bad beta in rule `{s}`")))?;
            return Ok(SelectionVariant::Beta(b));
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed: u64 = seed
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed in rule `{s}`")))?;
            return Ok(SelectionVariant::Random { seed });
        }
        Err(Error::Parse(format!("unknown selection rule `{s}`")))
    }
}

/// A selection variant plus the power floor that defines eligibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRule {
    pub variant: SelectionVariant,
    /// Candidates with `P_n(x)^2 <= power_floor` are never selected.
    pub power_floor: f64,
}

impl SelectionRule {
    pub fn new(variant: SelectionVariant) -> Result<Self> {
        if let SelectionVariant::Beta(b) = variant {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(invalid(format!(
                    "beta must be finite and nonnegative, got {b} (use f_over_p for the limit)"
                )));
            }
        }
        Ok(SelectionRule {
            variant,
            power_floor: DEFAULT_POWER_FLOOR,
        })
    }

    pub fn beta(beta: f64) -> Result<Self> {
        Self::new(SelectionVariant::Beta(beta))
    }

    pub fn p_greedy() -> Self {
        Self::beta(0.0).unwrap()
    }

    pub fn f_greedy() -> Self {
        Self::beta(1.0).unwrap()
    }

    pub fn f_over_p() -> Self {
        Self::new(SelectionVariant::FOverP).unwrap()
    }

    pub fn random(seed: u64) -> Self {
        Self::new(SelectionVariant::Random { seed }).unwrap()
    }

    pub fn with_power_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor >= 0.0) {
            return Err(invalid("power floor must be nonnegative"));
        }
        self.power_floor = floor;
        Ok(self)
    }

    /// Score of a candidate with residual `r` and squared power `p2`.
    #[inline]
    fn score(&self, r: f64, p2: f64) -> f64 {
        let p = p2.sqrt();
        match self.variant {
            SelectionVariant::Beta(0.0) => p,
            SelectionVariant::Beta(1.0) => r.abs(),
            SelectionVariant::Beta(b) => r.abs().powf(b) * p.powf(1.0 - b),
            SelectionVariant::FOverP => r.abs() / p,
            SelectionVariant::Random { .. } => 0.0,
        }
    }
}

/// When to stop the greedy loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub max_points: usize,
    /// Stop once the power value at the next point `P_n(x_{n+1})` drops below this.
    pub power_tol: f64,
    /// Stop once `max |r_n|` over the candidates drops below this.
    pub residual_tol: f64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            max_points: 300,
            power_tol: 1e-5,
            residual_tol: 1e-14,
        }
    }
}

impl StopCriteria {
    pub fn new(max_points: usize, power_tol: f64, residual_tol: f64) -> Result<Self> {
        if max_points == 0 {
            return Err(invalid("max_points must be at least 1"));
        }
        if !(power_tol >= 0.0) || !(residual_tol >= 0.0) {
            return Err(invalid("tolerances must be nonnegative"));
        }
        Ok(StopCriteria {
            max_points,
            power_tol,
            residual_tol,
        })
    }
}

/// Which stop criterion ended a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxPoints,
    PowerTol,
    ResidualTol,
    Exhausted,
    Breakdown,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxPoints => "max_points",
            StopReason::PowerTol => "power_tol",
            StopReason::ResidualTol => "residual_tol",
            StopReason::Exhausted => "exhausted",
            StopReason::Breakdown => "breakdown",
        })
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "max_points" => StopReason::MaxPoints,
            "power_tol" => StopReason::PowerTol,
            "residual_tol" => StopReason::ResidualTol,
            "exhausted" => StopReason::Exhausted,
            "breakdown" => StopReason::Breakdown,
            other => return Err(Error::Parse(format!("unknown stop reason `{other}`"))),
        })
    }
}

/// Incremental interpolation state over a fixed candidate set.
#[derive(Debug, Clone)]
pub struct GreedyState<'a> {
    kernel: &'a KernelModel,
    candidates: &'a CandidateSet,
    f_values: Vec<f64>,
    selectable: Vec<bool>,
    restricted: bool,
    selected: Vec<usize>,
    is_selected: Vec<bool>,
    /// `newton[j][i] = v_{j+1}(x_i)`, one column per step.
    newton: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    power_sq: Vec<f64>,
    power_sq_unclamped: Vec<f64>,
    residual: Vec<f64>,
    warnings: Vec<String>,
}

impl<'a> GreedyState<'a> {
    /// Empty state `X_0 = {}`: `P_0(x)^2 = k(x, x)` and `r_0 = f`.
    pub fn new(
        kernel: &'a KernelModel,
        candidates: &'a CandidateSet,
        f_values: &[f64],
    ) -> Result<Self> {
        kernel.check_dim(candidates.dim())?;
        if f_values.len() != candidates.len() {
            return Err(invalid(format!(
                "{} target values for {} candidates",
                f_values.len(),
                candidates.len()
            )));
        }
        if f_values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("target values must be finite"));
        }
        let power_sq: Vec<f64> = candidates
            .points()
            .map(|x| kernel.eval_unchecked(x, x))
            .collect();
        let mut warnings = Vec::new();
        let max_diag = power_sq.iter().cloned().fold(0.0, f64::max);
        if max_diag > 1.0 + NORMALIZATION_SLACK {
            let msg = format!(
                "kernel `{}` is not normalized on the candidate set: max k(x,x) = {max_diag}",
                kernel.name()
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let n = candidates.len();
        Ok(GreedyState {
            kernel,
            candidates,
            f_values: f_values.to_vec(),
            selectable: vec![true; n],
            restricted: false,
            selected: Vec::new(),
            is_selected: vec![false; n],
            newton: Vec::new(),
            coefficients: Vec::new(),
            power_sq_unclamped: power_sq.clone(),
            power_sq,
            residual: f_values.to_vec(),
            warnings,
        })
    }

    /// Restricts selection to the candidates flagged `true`. Power and
    /// residual are still tracked (and maximized over) on every candidate.
    pub fn with_selectable(mut self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.candidates.len() {
            return Err(invalid(
                "selection mask length differs from candidate count",
            ));
        }
        self.selectable = mask.to_vec();
        self.restricted = mask.iter().any(|m| !m);
        Ok(self)
    }

    pub fn kernel(&self) -> &KernelModel {
        self.kernel
    }

    pub fn candidates(&self) -> &CandidateSet {
        self.candidates
    }

    /// Number of selected points `n`.
    pub fn n(&self) -> usize {
        self.selected.len()
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn selected_points(&self) -> Vec<Vec<f64>> {
        self.selected
            .iter()
            .map(|&i| self.candidates.point(i).to_vec())
            .collect()
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    /// Newton basis column `v_j` over all candidates, `j` starting at 1.
    pub fn newton_column(&self, j: usize) -> &[f64] {
        &self.newton[j - 1]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Current `P_n(x)^2` per candidate (clamped at 0).
    pub fn power_sq(&self) -> &[f64] {
        &self.power_sq
    }

    /// `P_n(x)^2` as computed by the last update, before clamping.
    pub fn power_sq_unclamped(&self) -> &[f64] {
        &self.power_sq_unclamped
    }

    pub fn power(&self, i: usize) -> f64 {
        self.power_sq[i].sqrt()
    }

    /// Current residual `r_n(x)` per candidate.
    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `max_x P_n(x)` over all candidates.
    pub fn sigma(&self) -> f64 {
        self.power_sq.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    /// `max_x |r_n(x)|` over all candidates.
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Squared native norm of the current interpolant, `sum_j c_j^2`.
    pub fn partial_native_norm(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, c| acc + c * c)
    }

    #[inline]
    fn eligible(&self, i: usize, floor: f64) -> bool {
        self.selectable[i] && !self.is_selected[i] && self.power_sq[i] > floor
    }

    /// Selection scores; ineligible candidates get `-inf`.
    ///
    /// For `beta > 1` excluding candidates with tiny power realizes the limit
    /// value 0 the criterion takes at interpolation points.
    pub fn score_candidates(&self, rule: &SelectionRule) -> Result<Vec<f64>> {
        let scores: Vec<f64> = (0..self.candidates.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|i| {
                if !self.eligible(i, rule.power_floor) {
                    return f64::NEG_INFINITY;
                }
                let s = rule.score(self.residual[i], self.power_sq[i]);
                if s.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    s
                }
            })
            .collect();
        if scores.iter().all(|&s| s == f64::NEG_INFINITY) {
            return Err(Error::Exhausted);
        }
        Ok(scores)
    }

    /// Index of the next point; ties go to the lowest index.
    pub fn select_next(&self, rule: &SelectionRule) -> Result<usize> {
        self.select_scored(rule).map(|(i, _)| i)
    }

    fn select_scored(&self, rule: &SelectionRule) -> Result<(usize, f64)> {
        if let SelectionVariant::Random { seed } = rule.variant {
            let eligible: Vec<usize> = (0..self.candidates.len())
                .filter(|&i| self.eligible(i, rule.power_floor))
                .collect();
            if eligible.is_empty() {
                return Err(Error::Exhausted);
            }
            // one independent stream per step keeps this a pure function of (seed, n)
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(self.n() as u64);
            let pick = eligible[rng.gen_range(0..eligible.len())];
            return Ok((pick, f64::NAN));
        }
        let scores = self.score_candidates(rule)?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        Ok((best, scores[best]))
    }

    /// Adds candidate `idx` to the interpolation set.
    ///
    /// Appends `v_{n+1} = (k(., x_{n+1}) - sum_j v_j(x_{n+1}) v_j) / P_n(x_{n+1})`,
    /// the coefficient `c_{n+1} = r_n(x_{n+1}) / P_n(x_{n+1})`, and downdates
    /// power and residual.
    pub fn newton_update(&mut self, idx: usize, power_floor: f64) -> Result<()> {
        if idx >= self.candidates.len() {
            return Err(invalid(format!("candidate index {idx} out of range")));
        }
        let p2 = self.power_sq[idx];
        if self.is_selected[idx] || !(p2 > power_floor) {
            return Err(Error::Breakdown {
                index: idx,
                power_sq: p2,
                floor: power_floor,
            });
        }
        let p = p2.sqrt();
        let xnew = self.candidates.point(idx);
        let weights: Vec<f64> = self.newton.iter().map(|col| col[idx]).collect();
        let (kernel, cands, newton) = (self.kernel, self.candidates, &self.newton);

        let mut col = vec![0.0; cands.len()];
        col.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let start = ci * CHUNK;
                for (o, c) in chunk.iter_mut().enumerate() {
                    *c = kernel.eval_unchecked(cands.point(start + o), xnew);
                }
                for (w, vj) in weights.iter().zip(newton) {
                    let src = &vj[start..start + chunk.len()];
                    for (c, s) in chunk.iter_mut().zip(src) {
                        *c -= w * s;
                    }
                }
                for c in chunk.iter_mut() {
                    *c /= p;
                }
            });
        // exact values: v_{n+1} vanishes on X_n and equals P_n at x_{n+1}
        for &s in &self.selected {
            col[s] = 0.0;
        }
        col[idx] = p;

        let coeff = self.residual[idx] / p;
        for (i, &v) in col.iter().enumerate() {
            let raw = self.power_sq[i] - v * v;
            self.power_sq_unclamped[i] = raw;
            self.power_sq[i] = raw.max(0.0);
            self.residual[i] -= coeff * v;
        }
        self.power_sq[idx] = 0.0;

        self.selected.push(idx);
        self.is_selected[idx] = true;
        self.coefficients.push(coeff);
        self.newton.push(col);
        Ok(())
    }

    /// Runs select/update until a stop criterion fires and returns the trace.
    pub fn run(&mut self, rule: &SelectionRule, stop: &StopCriteria) -> RunTrace {
        let mut rows = Vec::new();
        let reason = loop {
            if self.n() >= stop.max_points {
                break StopReason::MaxPoints;
            }
            let max_residual = self.max_residual();
            if max_residual < stop.residual_tol {
                break StopReason::ResidualTol;
            }
            let (idx, criterion_value) = match self.select_scored(rule) {
                Ok(sel) => sel,
                Err(_) => break StopReason::Exhausted,
            };
            let nu = self.power(idx);
            if nu < stop.power_tol {
                break StopReason::PowerTol;
            }
            let row = TraceRow {
                n: self.n(),
                selected_index: idx,
                point: self.candidates.point(idx).to_vec(),
                nu,
                sigma: self.sigma(),
                residual_at_selected: self.residual[idx].abs(),
                max_residual,
                criterion_value,
                coefficient: self.residual[idx] / nu,
                partial_native_norm: self.partial_native_norm(),
            };
            if let Err(e) = self.newton_update(idx, rule.power_floor) {
                log::warn!("run stopped: {e}");
                self.warnings.push(e.to_string());
                break StopReason::Breakdown;
            }
            rows.push(row);
        };
        RunTrace {
            meta: TraceMeta {
                kernel: self.kernel.name().to_string(),
                rule: rule.variant,
                seed: self.candidates.provenance().seed(),
                dim: self.candidates.dim(),
                candidates: self.candidates.len(),
                restricted: self.restricted,
                stop_reason: reason,
                warnings: self.warnings.clone(),
            },
            rows,
            final_state: FinalState {
                n: self.n(),
                sigma: self.sigma(),
                max_residual: self.max_residual(),
                partial_native_norm: self.partial_native_norm(),
            },
        }
    }
}

/// Runs a greedy interpolation of `f_values` over `candidates`.
pub fn run_greedy(
    kernel: &KernelModel,
    candidates: &CandidateSet,
    f_values: &[f64],
    rule: &SelectionRule,
    stop: &StopCriteria,
) -> Result<RunTrace> {
    let mut state = GreedyState::new(kernel, candidates, f_values)?;
    Ok(state.run(rule, stop))
}

/// Like [`run_greedy`], but only candidates flagged in `selectable` may be picked.
pub fn run_greedy_masked(
    kernel: &KernelModel,
    candidates: &CandidateSet,
    f_values: &[f64],
    selectable: &[bool],
    rule: &SelectionRule,
    stop: &StopCriteria,
) -> Result<RunTrace> {
    let mut state = GreedyState::new(kernel, candidates, f_values)?.with_selectable(selectable)?;
    Ok(state.run(rule, stop))
}
