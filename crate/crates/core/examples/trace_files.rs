//! Writing a trace CSV, reading it back, and plotting two columns.

use gkl::experiment::{load_trace, quantity_series, save_trace, TraceFile};
use gkl::plot::{emit_plot, Reference};
use gkl::{run_greedy, CandidateSet, KernelModel, SelectionRule, StopCriteria};

fn main() -> gkl::Result<()> {
    let kernel = KernelModel::gaussian_w2();
    let cands = CandidateSet::sample_random(1, 2000, 2)?;
    let f: Vec<f64> = cands.points().map(|x| (4.0 * x[0]).sin() * x[1]).collect();
    let trace = run_greedy(
        &kernel,
        &cands,
        &f,
        &SelectionRule::beta(0.5)?,
        &StopCriteria::default(),
    )?;

    let dir = std::env::temp_dir().join("gkl_trace_example");
    let path = dir.join("beta_0.5.csv");
    let file = TraceFile {
        label: "beta_0.5".into(),
        trace,
        f_norm_sq: None,
    };
    save_trace(&path, &file)?;
    let back = load_trace(&path)?;
    assert_eq!(back, file);
    println!(
        "{} rows written to {} and read back unchanged",
        back.trace.len(),
        path.display()
    );

    let series = vec![
        quantity_series(&back, "max_residual")?,
        quantity_series(&back, "sigma")?,
    ];
    let mut series = series;
    series[0].label = "max |r_n|".into();
    series[1].label = "sigma_n".into();
    let out = emit_plot(
        dir.join("decay.svg"),
        "beta = 0.5",
        &series,
        &[Reference::slope(-1.0)],
    )?;
    println!(
        "plot written: {}, {} points dropped",
        out.svg.is_some(),
        out.dropped
    );
    Ok(())
}
