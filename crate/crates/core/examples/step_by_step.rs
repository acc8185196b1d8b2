//! Driving the greedy state by hand and checking it against a dense solve.

use gkl::greedy::DenseInterpolant;
use gkl::targets::SynthesizedTarget;
use gkl::{CandidateSet, GreedyState, KernelModel, SelectionRule};

fn main() -> gkl::Result<()> {
    let kernel = KernelModel::gaussian_w2();
    let cands = CandidateSet::sample_random(7, 500, 2)?;
    let target = SynthesizedTarget::random(&kernel, 2, 1, 10, 2)?;
    let f = target.values_on(&cands)?;

    let rule = SelectionRule::beta(0.5)?;
    let mut state = GreedyState::new(&kernel, &cands, &f)?;
    for _ in 0..15 {
        let idx = state.select_next(&rule)?;
        println!(
            "n = {:2}: pick {idx:3} with P = {:.3e}, |r| = {:.3e}",
            state.n(),
            state.power(idx),
            state.residual()[idx].abs()
        );
        state.newton_update(idx, rule.power_floor)?;
    }

    let fsel: Vec<f64> = state.selected().iter().map(|&i| f[i]).collect();
    let dense = DenseInterpolant::new(&kernel, &state.selected_points(), Some(&fsel))?;
    let mut worst = 0.0f64;
    for (i, x) in cands.points().enumerate() {
        worst = worst.max((state.residual()[i] - (f[i] - dense.value(x)?)).abs());
    }
    println!("max deviation from the dense interpolant: {worst:.2e}");
    println!(
        "|s_n|^2 = {:.6} <= |f|^2 = {:.6}",
        state.partial_native_norm(),
        target.norm_sq()
    );
    Ok(())
}
