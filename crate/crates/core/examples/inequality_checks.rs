//! Checking the greedy error inequalities on a target with known native norm.

use gkl::analysis::{
    abstract_product_sweep, check_improved_power_estimate, check_residual_product_lemma,
    check_theorem_final, CheckSummary,
};
use gkl::targets::SynthesizedTarget;
use gkl::{run_greedy, CandidateSet, KernelModel, SelectionRule, StopCriteria};

fn main() -> gkl::Result<()> {
    let kernel = KernelModel::gaussian_w2();
    let cands = CandidateSet::sample_random(3, 3000, 3)?;
    let target = SynthesizedTarget::random(&kernel, 3, 11, 20, 12)?;
    let f = target.values_on(&cands)?;
    let rule = SelectionRule::f_greedy();
    let trace = run_greedy(
        &kernel,
        &cands,
        &f,
        &rule,
        &StopCriteria::new(80, 1e-5, 0.0)?,
    )?;

    let fn2 = target.norm_sq();
    let mut records = check_improved_power_estimate(&trace, fn2, rule.variant)?;
    for n in (1..).take_while(|n| 2 * n < trace.len()) {
        records.push(check_residual_product_lemma(&trace, fn2, n)?);
        records.push(check_theorem_final(&trace, fn2, rule.variant, n)?);
    }
    records.extend(
        abstract_product_sweep(&trace.nu(), &trace.sigma(), &trace.sigma(), 100, 0)
            .into_iter()
            .map(|mut r| {
                r.name = "abstract_product".into();
                r
            }),
    );
    for s in CheckSummary::from_records(&records) {
        println!(
            "{:<24} {} records over n = {}..{}: {}",
            s.name,
            s.count,
            s.n_range.0,
            s.n_range.1,
            if s.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
