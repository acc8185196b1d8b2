//! Segment errors of piecewise linear interpolation of x^alpha.

use gkl::analysis::{h_alpha, l1_error_segment, lower_bound_curve, LowerBound};

fn main() -> gkl::Result<()> {
    let alpha = 0.51;
    for k in [1.0 + 1e-6, 1.5, 2.0, 10.0, 1e6, f64::INFINITY] {
        println!("h({k:e}) = {:.6e}", h_alpha(k, alpha)?);
    }
    // uniform nodes 0, 1/n, ..., 1
    for n in [10usize, 100, 1000] {
        let l1: f64 = (0..n)
            .map(|i| l1_error_segment(i as f64 / n as f64, (i + 1) as f64 / n as f64, alpha))
            .sum::<gkl::Result<f64>>()?;
        println!(
            "n = {n:4}: L1 error {l1:.4e}, reference n^-alpha {:.4e}, n^-2 {:.4e}",
            lower_bound_curve(n, alpha, LowerBound::Uniform),
            lower_bound_curve(n, alpha, LowerBound::Optimal)
        );
    }
    Ok(())
}
