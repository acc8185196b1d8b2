//! Theoretical decay curves.
//!
//! `bound_*` bound the geometric mean of `P_i(x_{i+1})` over `i = n+1..=2n`
//! given a bound on the Kolmogorov widths. `greedy_bound_*` are the factors
//! multiplying `|r_{n+1}|_H` in the resulting bound on `min_i |r_i|_inf`.
//! The width constants are never estimated here; callers supply them.

use crate::error::{invalid, Result};

fn check_n(n: usize, min: usize) -> Result<f64> {
    if n < min {
        return Err(invalid(format!("n must be at least {min}, got {n}")));
    }
    Ok(n as f64)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta < 0.0 {
        return Err(invalid(format!("beta must be >= 0, got {beta}")));
    }
    Ok(())
}

/// `2^(alpha+1/2) max(1,C0) e^alpha log(n)^alpha n^(-alpha)` for widths `d_n <= C0 n^-alpha`.
pub fn bound_algebraic(n: usize, alpha: f64, c0_big: f64) -> Result<f64> {
    let nf = check_n(n, 3)?;
    let log = (alpha + 0.5) * std::f64::consts::LN_2
        + c0_big.max(1.0).ln()
        + alpha
        + alpha * nf.ln().ln()
        - alpha * nf.ln();
    Ok(log.exp())
}

/// `sqrt(2 max(1,C0)) exp(-2^-(2+alpha) c0 n^alpha)` for widths `d_n <= C0 exp(-c0 n^alpha)`.
pub fn bound_exponential(n: usize, alpha: f64, c0: f64, c0_big: f64) -> Result<f64> {
    let nf = check_n(n, 2)?;
    let c1 = 2f64.powf(-(2.0 + alpha)) * c0;
    Ok((2.0 * c0_big.max(1.0)).sqrt() * (-c1 * nf.powf(alpha)).exp())
}

/// `C n^(-min(1,beta)/2) (log(n)/n)^(alpha/max(1,beta))` with
/// `C = (2^(alpha+1/2) max(1,C0) e^alpha)^(1/max(1,beta))`. `beta = inf` is f/P-greedy.
pub fn greedy_bound_algebraic(n: usize, alpha: f64, c0_big: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let nf = check_n(n, 3)?;
    let e = 1.0 / beta.max(1.0);
    let log_c = (alpha + 0.5) * std::f64::consts::LN_2 + c0_big.max(1.0).ln() + alpha;
    let log = e * (log_c + alpha * (nf.ln().ln() - nf.ln())) - 0.5 * beta.min(1.0) * nf.ln();
    Ok(log.exp())
}

/// `C n^(-min(1,beta)/2) exp(-c1 n^alpha)` with `C = sqrt(2 max(1,C0))^(1/max(1,beta))`
/// and `c1 = 2^-(2+alpha) c0 / max(1,beta)`.
pub fn greedy_bound_exponential(
    n: usize,
    alpha: f64,
    c0: f64,
    c0_big: f64,
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    let nf = check_n(n, 2)?;
    let e = 1.0 / beta.max(1.0);
    let c1 = 2f64.powf(-(2.0 + alpha)) * c0 * e;
    let log = e * 0.5 * (2.0 * c0_big.max(1.0)).ln()
        - 0.5 * beta.min(1.0) * nf.ln()
        - c1 * nf.powf(alpha);
    Ok(log.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBound {
    /// `n^-alpha`, the best rate for uniformly spaced points
    Uniform,
    /// `n^-2`, the best rate for any point placement
    Optimal,
}

/// Reference slopes with unit constant, for visual comparison only.
pub fn lower_bound_curve(n: usize, alpha: f64, variant: LowerBound) -> f64 {
    let nf = n as f64;
    match variant {
        LowerBound::Uniform => nf.powf(-alpha),
        LowerBound::Optimal => nf.powi(-2),
    }
}
