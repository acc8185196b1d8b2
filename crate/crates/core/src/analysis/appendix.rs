//! Closed forms for interpolating `f(x) = x^alpha` on `[0, 1]` with the
//! piecewise linear kernel `max(1 - |x - y|, 0)`.
//!
//! Between two neighbouring nodes the interpolant is the chord of `f`, so the
//! segment error integrates `x^alpha` minus that chord.

use crate::error::{invalid, Result};

/// `|f - s_n|_{L1([z1, z2])}` for `f = x^alpha` and its chord on `[z1, z2]`.
pub fn l1_error_segment(z1: f64, z2: f64, alpha: f64) -> Result<f64> {
    if !(z1 >= 0.0 && z1 < z2 && z2.is_finite()) {
        return Err(invalid(format!(
            "need 0 <= z1 < z2, got z1 = {z1}, z2 = {z2}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let h = z2 - z1;
    let (a1, a2) = (z1.powf(alpha), z2.powf(alpha));
    let integral = (z2.powf(1.0 + alpha) - z1.powf(1.0 + alpha)) / (1.0 + alpha);
    Ok(integral - 0.5 * (a2 - a1) * h - a1 * h)
}

/// `h_alpha(k)` with `k = z2 / z1`: the segment error divided by `z2^alpha (z2 - z1)`.
pub fn h_alpha(k: f64, alpha: f64) -> Result<f64> {
    if !(k > 1.0) {
        return Err(invalid(format!("k must exceed 1, got {k}")));
    }
    let inv = 1.0 / (1.0 + alpha);
    // 1 - k^-alpha without cancellation near k = 1
    let one_minus = -(-alpha * (k - 1.0).ln_1p()).exp_m1();
    let k_neg = 1.0 - one_minus;
    if k.is_infinite() {
        return Ok(inv - 0.5);
    }
    Ok(inv + inv * one_minus / (k - 1.0) - 0.5 * (1.0 + k_neg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_examples() {
        assert!(l1_error_segment(0.0, 1.0, 1.0).unwrap().abs() < 1e-15);
        assert!((l1_error_segment(0.0, 1.0, 0.5).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((l1_error_segment(0.25, 0.5, 0.51).unwrap() - 0.0014648571115861874).abs() < 1e-15);
    }

    #[test]
    fn segment_rejects_bad_input() {
        assert!(l1_error_segment(0.5, 0.5, 0.5).is_err());
        assert!(l1_error_segment(0.6, 0.5, 0.5).is_err());
        assert!(l1_error_segment(-0.1, 0.5, 0.5).is_err());
        assert!(l1_error_segment(0.1, 0.5, 1.5).is_err());
    }

    #[test]
    fn segment_scaling_matches_h() {
        // error = z2^alpha (z2 - z1) h_alpha(k)
        for &(z1, z2, a) in &[(0.1, 0.3, 0.51), (0.02, 0.9, 0.75), (0.4, 0.41, 0.6)] {
            let k: f64 = z2 / z1;
            let via_h = z2.powf(a) * (z2 - z1) * h_alpha(k, a).unwrap();
            let direct = l1_error_segment(z1, z2, a).unwrap();
            assert!((direct - via_h).abs() < 1e-15, "{direct} {via_h}");
        }
    }

    #[test]
    fn h_limits() {
        assert!(h_alpha(1.0 + 1e-6, 0.51).unwrap().abs() < 1e-5);
        assert!(h_alpha(1.0 + 1e-6, 0.51).unwrap() >= 0.0);
        assert!((h_alpha(1e6, 0.51).unwrap() - 0.16181683550968126).abs() < 1e-14);
        assert!((h_alpha(f64::INFINITY, 0.51).unwrap() - 0.16225165562913907).abs() < 1e-15);
        assert!((h_alpha(1.5, 0.51).unwrap() - 0.0030822390186550280).abs() < 1e-16);
        assert!((h_alpha(2.0, 0.51).unwrap() - 0.0083441202251042866).abs() < 1e-16);
        assert!(h_alpha(1.0, 0.5).is_err());
    }

    #[test]
    fn h_increasing_from_left_endpoint() {
        let a = 0.51;
        let left = h_alpha(1.5, a).unwrap();
        let mut prev = left;
        let mut k: f64 = 1.5;
        while k < 1e6 {
            k *= 1.01;
            let v = h_alpha(k, a).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!(left > 0.0);
    }
}
