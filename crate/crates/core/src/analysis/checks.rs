//! Numerical verification of the greedy error inequalities.
//!
//! All products are evaluated as sums of logarithms. A check passes when
//! `lhs_log <= rhs_log` up to a relative slack `tol * max(1, |lhs_log|, |rhs_log|)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RunTrace;
use crate::error::{invalid, Result};
use crate::greedy::SelectionVariant;

/// Relative log-space tolerance for the abstract product inequality.
pub const ABSTRACT_TOL: f64 = 1e-12;
/// Relative log-space tolerance for the native-norm based checks.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed excess of `|s_n|^2` over `|f|^2` before the norms count as inconsistent.
pub const NORM_SLACK: f64 = 1e-9;

/// Outcome of one inequality evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub n: usize,
    pub lhs_log: f64,
    pub rhs_log: f64,
    /// `rhs_log - lhs_log`; negative means the inequality is violated.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, n: usize, lhs_log: f64, rhs_log: f64, tol: f64) -> Self {
        let margin = if lhs_log == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            rhs_log - lhs_log
        };
        let scale = 1f64.max(lhs_log.abs()).max(rhs_log.abs());
        let allowed = if scale.is_finite() { tol * scale } else { tol };
        let pass = margin >= -allowed;
        CheckRecord {
            name: name.into(),
            n,
            lhs_log,
            rhs_log,
            margin,
            tolerance: allowed,
            pass,
        }
    }

    /// How far past the tolerance the inequality is violated (0 when it passes).
    pub fn violation(&self) -> f64 {
        if self.pass {
            0.0
        } else {
            -self.margin - self.tolerance
        }
    }
}

fn ln(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

fn needs_rows(trace: &RunTrace, n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("window size n must be at least 1"));
    }
    if trace.len() < 2 * n + 1 {
        return Err(invalid(format!(
            "trace has {} rows, need at least {} for n = {n}",
            trace.len(),
            2 * n + 1
        )));
    }
    Ok(())
}

fn greedy_beta(trace: &RunTrace, rule: SelectionVariant) -> Result<f64> {
    if trace.meta.restricted {
        return Err(invalid(
            "selection was restricted to a subset; beta-greedy estimates do not apply",
        ));
    }
    rule.beta()
        .ok_or_else(|| invalid("random selection is not a beta-greedy rule"))
}

/// `prod_{i=1}^K nu_{N+i}^2 <= (K/m)^m (K/(K-m))^(K-m) sigma_{N+1}^(2m) d_m^(2K-2m)`.
///
/// `d_bound[m]` must bound the Kolmogorov width `d_m` from above, e.g. the
/// maximal power value of any `m`-point set.
pub fn check_abstract_product_inequality(
    nu: &[f64],
    sigma: &[f64],
    d_bound: &[f64],
    big_n: usize,
    k: usize,
    m: usize,
) -> Result<CheckRecord> {
    if !(1 <= m && m < k) {
        return Err(invalid(format!("need 1 <= m < K, got m = {m}, K = {k}")));
    }
    if nu.len() < big_n + k + 1 || sigma.len() < big_n + 2 || d_bound.len() < m + 1 {
        return Err(invalid("sequences too short for (N, K, m)"));
    }
    let lhs: f64 = (1..=k).map(|i| 2.0 * ln(nu[big_n + i])).sum();
    let (kf, mf) = (k as f64, m as f64);
    let mut rhs = mf * (kf / mf).ln() + (kf - mf) * (kf / (kf - mf)).ln();
    rhs += 2.0 * mf * ln(sigma[big_n + 1]);
    rhs += (2.0 * kf - 2.0 * mf) * ln(d_bound[m]);
    Ok(CheckRecord::new(
        format!("abstract_product_K{k}_m{m}"),
        big_n,
        lhs,
        rhs,
        ABSTRACT_TOL,
    ))
}

/// Runs [`check_abstract_product_inequality`] on `samples` random admissible
/// triples `(N, K, m)` drawn with a fixed seed.
pub fn abstract_product_sweep(
    nu: &[f64],
    sigma: &[f64],
    d_bound: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<CheckRecord> {
    let len = nu.len().min(sigma.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    if len < 4 || d_bound.len() < 2 {
        return out;
    }
    for _ in 0..samples {
        // N + K + 1 <= len, 2 <= K, m < K, m < d_bound.len()
        let k = rng.gen_range(2..len - 1);
        let big_n = rng.gen_range(0..len - k);
        let m = rng.gen_range(1..k.min(d_bound.len()));
        if let Ok(rec) = check_abstract_product_inequality(nu, sigma, d_bound, big_n, k, m) {
            out.push(rec);
        }
    }
    out
}

/// `[prod |r_i(x_{i+1})|]^(1/n) <= n^(-1/2) |r_{n+1}|_H [prod P_i(x_{i+1})]^(1/n)`,
/// products over `i = n+1..=2n`. Holds for any point sequence.
pub fn check_residual_product_lemma(
    trace: &RunTrace,
    f_norm_sq: f64,
    n: usize,
) -> Result<CheckRecord> {
    needs_rows(trace, n)?;
    let r_norm_sq = trace.residual_norm_sq(n + 1, f_norm_sq)?;
    let nf = n as f64;
    let rows = &trace.rows[n + 1..=2 * n];
    let lhs = rows.iter().map(|r| ln(r.residual_at_selected)).sum::<f64>() / nf;
    let rhs =
        -0.5 * nf.ln() + 0.5 * ln(r_norm_sq) + rows.iter().map(|r| ln(r.nu)).sum::<f64>() / nf;
    Ok(CheckRecord::new(
        "residual_product_lemma",
        n,
        lhs,
        rhs,
        TRACE_TOL,
    ))
}

/// Per-row `max |r_i| <= |r_i|_H * P_i(x_{i+1})^e` with `e = 1` for
/// `beta <= 1` and `e = 1/beta` otherwise (`1/inf = 0`).
pub fn check_improved_power_estimate(
    trace: &RunTrace,
    f_norm_sq: f64,
    rule: SelectionVariant,
) -> Result<Vec<CheckRecord>> {
    let beta = greedy_beta(trace, rule)?;
    let e = if beta <= 1.0 { 1.0 } else { 1.0 / beta };
    trace
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let r_norm_sq = trace.residual_norm_sq(i, f_norm_sq)?;
            let power_term = if e == 0.0 { 0.0 } else { e * ln(row.nu) };
            let rhs = 0.5 * ln(r_norm_sq) + power_term;
            Ok(CheckRecord::new(
                "improved_power_estimate",
                i,
                ln(row.max_residual),
                rhs,
                TRACE_TOL,
            ))
        })
        .collect()
}

/// `[prod max|r_i|]^(1/n) <= n^(-min(1,beta)/2) |r_{n+1}|_H [prod P_i(x_{i+1})^(1/max(1,beta))]^(1/n)`.
pub fn check_theorem_final(
    trace: &RunTrace,
    f_norm_sq: f64,
    rule: SelectionVariant,
    n: usize,
) -> Result<CheckRecord> {
    let beta = greedy_beta(trace, rule)?;
    needs_rows(trace, n)?;
    let r_norm_sq = trace.residual_norm_sq(n + 1, f_norm_sq)?;
    let nf = n as f64;
    let rows = &trace.rows[n + 1..=2 * n];
    let lhs = rows.iter().map(|r| ln(r.max_residual)).sum::<f64>() / nf;
    let power_exp = 1.0 / beta.max(1.0);
    let power_term = if power_exp == 0.0 {
        0.0
    } else {
        power_exp * rows.iter().map(|r| ln(r.nu)).sum::<f64>() / nf
    };
    let rhs = -0.5 * beta.min(1.0) * nf.ln() + 0.5 * ln(r_norm_sq) + power_term;
    Ok(CheckRecord::new("theorem_final", n, lhs, rhs, TRACE_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{FinalState, TraceMeta, TraceRow};
    use crate::greedy::StopReason;

    fn synthetic_trace(rows: Vec<(f64, f64, f64, f64)>, rule: SelectionVariant) -> RunTrace {
        // (nu, residual_at_selected, max_residual, coefficient)
        let mut partial = 0.0;
        let mut out = Vec::new();
        for (n, (nu, ras, mr, c)) in rows.into_iter().enumerate() {
            out.push(TraceRow {
                n,
                selected_index: n,
                point: vec![n as f64],
                nu,
                sigma: nu,
                residual_at_selected: ras,
                max_residual: mr,
                criterion_value: 0.0,
                coefficient: c,
                partial_native_norm: partial,
            });
            partial += c * c;
        }
        RunTrace {
            meta: TraceMeta {
                kernel: "test".into(),
                rule,
                seed: None,
                dim: 1,
                candidates: out.len(),
                restricted: false,
                stop_reason: StopReason::MaxPoints,
                warnings: vec![],
            },
            final_state: FinalState {
                n: out.len(),
                sigma: 0.0,
                max_residual: 0.0,
                partial_native_norm: partial,
            },
            rows: out,
        }
    }

    #[test]
    fn abstract_all_ones() {
        let ones = vec![1.0; 4];
        let rec = check_abstract_product_inequality(&ones, &ones, &ones, 0, 2, 1).unwrap();
        assert_eq!(rec.lhs_log, 0.0);
        assert!((rec.rhs_log - 4f64.ln()).abs() < 1e-15);
        assert!(rec.pass);
    }

    #[test]
    fn abstract_rejects_bad_params() {
        let ones = vec![1.0; 10];
        assert!(check_abstract_product_inequality(&ones, &ones, &ones, 0, 2, 2).is_err());
        assert!(check_abstract_product_inequality(&ones, &ones, &ones, 0, 3, 0).is_err());
        assert!(check_abstract_product_inequality(&ones, &ones, &ones, 8, 3, 1).is_err());
    }

    #[test]
    fn abstract_detects_violation() {
        // nu larger than sigma is impossible for a real run
        let nu = vec![1.0; 6];
        let sigma = vec![0.1; 6];
        let rec = check_abstract_product_inequality(&nu, &sigma, &sigma, 0, 4, 2).unwrap();
        assert!(!rec.pass);
        assert!(rec.violation() > 0.0);
    }

    #[test]
    fn zero_residual_trivially_passes() {
        let rows = (0..5).map(|_| (0.5, 0.0, 0.0, 0.0)).collect();
        let t = synthetic_trace(rows, SelectionVariant::Beta(1.0));
        for n in 1..=2 {
            let rec = check_residual_product_lemma(&t, 1.0, n).unwrap();
            assert_eq!(rec.lhs_log, f64::NEG_INFINITY);
            assert!(rec.pass);
        }
    }

    #[test]
    fn short_trace_rejected() {
        let rows = (0..4).map(|_| (0.5, 0.1, 0.1, 0.1)).collect();
        let t = synthetic_trace(rows, SelectionVariant::Beta(1.0));
        assert!(check_theorem_final(&t, 1.0, SelectionVariant::Beta(1.0), 2).is_err());
        assert!(check_residual_product_lemma(&t, 1.0, 0).is_err());
    }

    #[test]
    fn inconsistent_norm_rejected() {
        let rows = (0..5).map(|_| (0.5, 0.1, 0.1, 1.0)).collect();
        let t = synthetic_trace(rows, SelectionVariant::Beta(0.0));
        assert!(matches!(
            check_residual_product_lemma(&t, 1.0, 2),
            Err(crate::Error::InconsistentNorm { .. })
        ));
    }

    #[test]
    fn f_over_p_has_no_power_term() {
        let rows = (0..3).map(|_| (0.01, 0.5, 0.5, 0.1)).collect();
        let t = synthetic_trace(rows, SelectionVariant::FOverP);
        let recs = check_improved_power_estimate(&t, 4.0, SelectionVariant::FOverP).unwrap();
        // rhs = 0.5 ln(4 - 0) = ln 2
        assert!((recs[0].rhs_log - 2f64.ln()).abs() < 1e-15);
        assert!(recs.iter().all(|r| r.pass));
    }

    #[test]
    fn random_rule_is_not_beta_greedy() {
        let rows = (0..3).map(|_| (0.5, 0.1, 0.1, 0.1)).collect();
        let t = synthetic_trace(rows, SelectionVariant::Random { seed: 1 });
        assert!(check_improved_power_estimate(&t, 1.0, t.meta.rule).is_err());
    }

    #[test]
    fn record_tolerance_is_relative() {
        let r = CheckRecord::new("x", 1, -100.0, -100.0 - 5e-9, TRACE_TOL);
        assert!(r.pass);
        let r = CheckRecord::new("x", 1, -100.0, -100.0 - 2e-8, TRACE_TOL);
        assert!(!r.pass);
    }
}
