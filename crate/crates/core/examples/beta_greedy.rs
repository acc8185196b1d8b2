//! One beta-greedy run per beta on f(x) = x^0.51 with the piecewise linear
//! kernel, and the resulting error decay.

use gkl::analysis::fit_loglog_slope;
use gkl::targets::power_law;
use gkl::{run_greedy, CandidateSet, KernelModel, SelectionRule, StopCriteria};

fn main() -> gkl::Result<()> {
    let kernel = KernelModel::wendland_k0();
    let cands = CandidateSet::uniform_grid(2000, 1)?;
    let f = power_law(&cands, 0.51)?;
    let stop = StopCriteria::new(200, 1e-5, 1e-14)?;

    let rules = [
        SelectionRule::p_greedy(),
        SelectionRule::beta(0.5)?,
        SelectionRule::f_greedy(),
        SelectionRule::f_over_p(),
    ];
    for rule in rules {
        let t = run_greedy(&kernel, &cands, &f, &rule, &stop)?;
        let fit = fit_loglog_slope(&t.ns(), &t.max_residual(), (20, 199))?;
        println!(
            "{:>10}: {} points, final max residual {:.3e}, slope {:.2}",
            rule.variant.to_string(),
            t.final_state.n,
            t.final_state.max_residual,
            fit.slope
        );
    }
    Ok(())
}
