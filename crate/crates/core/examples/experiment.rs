//! Running a JSON experiment from code and plotting its traces.
//!
//! Usage: `cargo run --example experiment -- [config.json] [out_dir]`

use std::path::{Path, PathBuf};

use gkl::experiment::{run_experiment, ExperimentConfig};

fn main() -> gkl::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments/sec6_2.json")
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let cfg = ExperimentConfig::load(&config)?;
    let dir = config.parent().unwrap_or(Path::new("."));
    let outcome = run_experiment(&cfg, dir, &out)?;
    for t in &outcome.traces {
        println!(
            "{}: {} points ({})",
            t.label, t.trace.final_state.n, t.trace.meta.stop_reason
        );
    }
    for (label, fit) in &outcome.slopes {
        if let Some(f) = fit {
            println!("{label}: slope {:.3}", f.slope);
        }
    }
    println!(
        "{} checks, {} failed",
        outcome.checks.len(),
        outcome.failed_checks().count()
    );
    for p in &outcome.written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
