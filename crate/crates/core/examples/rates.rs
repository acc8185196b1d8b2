//! Geometric-mean windows of a P-greedy run against the algebraic bound.

use gkl::analysis::{BoundParams, RateReport};
use gkl::{run_greedy, CandidateSet, KernelModel, SelectionRule, StopCriteria};

fn main() -> gkl::Result<()> {
    let kernel = KernelModel::wendland_k0();
    let cands = CandidateSet::uniform_grid(1000, 1)?;
    let f = vec![0.0; cands.len()];
    let stop = StopCriteria::new(201, 0.0, 0.0)?;
    let trace = run_greedy(&kernel, &cands, &f, &SelectionRule::p_greedy(), &stop)?;

    // widths of the piecewise linear kernel decay like n^-1/2; C0 = 1 is a guess
    let bound = BoundParams::Algebraic {
        alpha: 0.5,
        c0_big: 1.0,
    };
    let report = RateReport::new("p_greedy", &trace)?
        .with_slope(&trace, "sigma", (10, 200))?
        .with_bound(bound)?;
    if let Some(fit) = &report.slope {
        println!("sigma slope over n = 10..200: {:.3}", fit.slope);
    }
    for (n, b) in report.bound_samples.iter().step_by(20) {
        let g = report.nu_windows[n - 1].1;
        println!("n = {n:3}: nu window {g:.4e}, bound {b:.4e}");
    }
    Ok(())
}
