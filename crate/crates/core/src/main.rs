use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gkl::analysis::{fit_loglog_slope, geometric_mean_window, BoundParams, CheckSummary};
use gkl::experiment::{
    load_trace, plot_quantity, run_experiment, verify_experiment, verify_traces, ExperimentConfig,
    ExperimentOutcome,
};
use gkl::Error;

#[derive(Parser)]
#[command(
    name = "gkl",
    version,
    about = "Greedy kernel interpolation experiments"
)]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every rule of a config and write traces, checks and plots.
    Run {
        config: PathBuf,
        /// Base directory for relative output paths.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the inequality checks; exits 1 if any check fails.
    Verify {
        /// Config to run fresh; omit when checking trace files.
        config: Option<PathBuf>,
        /// Check existing trace CSVs instead of running a config.
        #[arg(long, num_args = 1.., conflicts_with = "config")]
        traces: Vec<PathBuf>,
    },
    /// Log-log plot of one column of several traces.
    Plot {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Dashed reference line with this slope (repeatable).
        #[arg(long = "ref", allow_negative_numbers = true)]
        refs: Vec<f64>,
        /// Trace column, or `<column>_gm` for geometric-mean windows.
        #[arg(long, default_value = "max_residual")]
        column: String,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Log-log slope of a trace column over a window of n.
    Rates {
        trace: PathBuf,
        #[arg(long, default_value = "max_residual")]
        column: String,
        /// `lo:hi`, inclusive.
        #[arg(long, value_parser = parse_window)]
        window: (usize, usize),
        /// Width model for a bound on the nu windows:
        /// `alg:ALPHA:C0` or `exp:ALPHA:c0:C0`.
        #[arg(long, value_parser = parse_bound)]
        bound: Option<BoundParams>,
    },
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo = a
        .trim()
        .parse()
        .map_err(|_| format!("bad lower end `{a}`"))?;
    let hi = b
        .trim()
        .parse()
        .map_err(|_| format!("bad upper end `{b}`"))?;
    Ok((lo, hi))
}

fn parse_bound(s: &str) -> Result<BoundParams, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<f64> = parts[1..]
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| format!("bad number `{p}`")))
        .collect::<Result<_, _>>()?;
    match (parts[0], nums.as_slice()) {
        ("alg", &[alpha, c0_big]) => Ok(BoundParams::Algebraic { alpha, c0_big }),
        ("exp", &[alpha, c0, c0_big]) => Ok(BoundParams::Exponential { alpha, c0, c0_big }),
        _ => Err("expected alg:ALPHA:C0 or exp:ALPHA:c0:C0".into()),
    }
}

/// Error plus the exit code it maps to.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn config(e: Error) -> Self {
        match e {
            Error::Io(_) => Self::io(e),
            _ => Failure {
                code: 2,
                kind: "config",
                message: e.to_string(),
            },
        }
    }

    fn io(e: Error) -> Self {
        Failure {
            code: 3,
            kind: "io",
            message: e.to_string(),
        }
    }

    fn other(e: Error) -> Self {
        match e {
            Error::Io(_) => Self::io(e),
            _ => Failure {
                code: 1,
                kind: "runtime",
                message: e.to_string(),
            },
        }
    }
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let cfg = ExperimentConfig::load(path).map_err(Failure::config)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, dir))
}

fn report_checks(out: &ExperimentOutcome) -> bool {
    for note in &out.notes {
        println!("{note}");
    }
    // one line per check family; abstract records carry K and m in their name
    let families: Vec<_> = out
        .checks
        .iter()
        .cloned()
        .map(|mut r| {
            if let Some(i) = r.name.find(":abstract_product_K") {
                r.name.truncate(i + ":abstract_product".len());
            }
            r
        })
        .collect();
    for s in CheckSummary::from_records(&families) {
        println!(
            "{} {} n={}..{} count={} max_violation={:.3e}",
            if s.pass { "PASS" } else { "FAIL" },
            s.name,
            s.n_range.0,
            s.n_range.1,
            s.count,
            s.max_violation
        );
    }
    let failed: Vec<_> = out.failed_checks().collect();
    for f in &failed {
        println!(
            "failed: {} n={} lhs_log={:.6e} rhs_log={:.6e} margin={:.3e}",
            f.name, f.n, f.lhs_log, f.rhs_log, f.margin
        );
    }
    failed.is_empty()
}

fn report_runs(out: &ExperimentOutcome) {
    for t in &out.traces {
        let fs = &t.trace.final_state;
        println!(
            "{}: n={} stop={} sigma={:.6e} max_residual={:.6e}",
            t.label, fs.n, t.trace.meta.stop_reason, fs.sigma, fs.max_residual
        );
        for w in &t.trace.meta.warnings {
            eprintln!("warning: {}: {w}", t.label);
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let (cfg, dir) = load_config(&config)?;
            let out = run_experiment(&cfg, &dir, &out_dir).map_err(Failure::other)?;
            report_runs(&out);
            for (label, fit) in &out.slopes {
                match fit {
                    Some(f) => println!(
                        "{label}: max_residual slope {:.4} over n={}..{}",
                        f.slope, f.window.0, f.window.1
                    ),
                    None => println!("{label}: max_residual slope unavailable"),
                }
            }
            if !report_checks(&out) {
                log::warn!("some checks failed, see {}", cfg.outputs.checks_csv);
            }
            for p in &out.written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Verify { config, traces } => {
            let out = match config {
                Some(path) => {
                    let (cfg, dir) = load_config(&path)?;
                    verify_experiment(&cfg, &dir).map_err(Failure::other)?
                }
                None => {
                    if traces.is_empty() {
                        return Err(Failure::config(Error::InvalidInput(
                            "verify needs a config or --traces".into(),
                        )));
                    }
                    let files = traces
                        .iter()
                        .map(load_trace)
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(Failure::io)?;
                    verify_traces(files).map_err(Failure::other)?
                }
            };
            report_runs(&out);
            if report_checks(&out) {
                Ok(())
            } else {
                let n = out.failed_checks().count();
                Err(Failure {
                    code: 1,
                    kind: "check_failed",
                    message: format!(
                        "{n} failed checks in {}",
                        CheckSummary::from_records(&out.checks)
                            .iter()
                            .filter(|s| !s.pass)
                            .map(|s| s.name.as_str())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                })
            }
        }
        Command::Plot {
            traces,
            out,
            refs,
            column,
            title,
        } => {
            if !gkl::experiment::is_plot_quantity(&column) {
                return Err(Failure::config(Error::InvalidInput(format!(
                    "unknown column `{column}`"
                ))));
            }
            let files = traces
                .iter()
                .map(|p| {
                    let mut f = load_trace(p)?;
                    if f.label.is_empty() {
                        f.label = p.file_stem().unwrap_or_default().to_string_lossy().into();
                    }
                    Ok(f)
                })
                .collect::<Result<Vec<_>, Error>>()
                .map_err(Failure::io)?;
            let title = if title.is_empty() {
                column.clone()
            } else {
                title
            };
            let res =
                plot_quantity(&out, &title, &files, &column, &refs).map_err(Failure::other)?;
            if res.dropped > 0 {
                eprintln!("warning: dropped {} nonpositive points", res.dropped);
            }
            match res.svg {
                Some(_) => println!("wrote {}", out.display()),
                None => eprintln!("warning: nothing to plot, {} not written", out.display()),
            }
            Ok(())
        }
        Command::Rates {
            trace,
            column,
            window,
            bound,
        } => {
            let file = load_trace(&trace).map_err(Failure::io)?;
            let t = &file.trace;
            let values = t.column(&column).map_err(Failure::config)?;
            let fit = fit_loglog_slope(&t.ns(), &values, window).map_err(Failure::config)?;
            println!(
                "{} {column}: slope {:.6} intercept {:.6} over n={}..{} ({} points, {} skipped)",
                file.label, fit.slope, fit.intercept, window.0, window.1, fit.used, fit.skipped
            );
            let (nu, sigma) = (t.nu(), t.sigma());
            for n in [window.0, window.1] {
                if let (Ok(gn), Ok(gs)) = (
                    geometric_mean_window(&nu, n),
                    geometric_mean_window(&sigma, n),
                ) {
                    print!("n={n}: nu_gm={gn:.6e} sigma_gm={gs:.6e}");
                    if let Some(b) = bound {
                        match b.nu_bound(n) {
                            Ok(v) => {
                                print!(" bound={v:.6e} {}", if gn <= v { "ok" } else { "exceeded" })
                            }
                            Err(e) => print!(" bound unavailable ({e})"),
                        }
                    }
                    println!();
                }
            }
            Ok(())
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("GKL_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::config(Error::InvalidInput(format!(
            "GKL_THREADS must be a positive integer, got `{v}`"
        )))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::other(Error::InvalidInput(e.to_string())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match init_threads().and_then(|()| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let line = serde_json::json!({
                "error": f.kind,
                "exit_code": f.code,
                "message": f.message,
            });
            eprintln!("{line}");
            ExitCode::from(f.code)
        }
    }
}
