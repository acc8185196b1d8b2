//! JSON-configured experiments: candidate sets, targets, one greedy run per
//! rule, trace/check CSVs and log-log plots.

mod config;
mod trace_io;

pub use config::{
    is_plot_quantity, DomainConfig, ExperimentConfig, KernelConfig, OutputConfig, RuleConfig,
    SliceConfig, StopConfig, TargetConfig,
};
pub use trace_io::{
    load_trace, parse_trace, save_trace, trace_header, write_checks, write_trace, TraceFile,
    CHECKS_HEADER,
};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{
    abstract_product_sweep, check_improved_power_estimate, check_residual_product_lemma,
    check_theorem_final, fit_loglog_slope, geometric_mean_series, CheckRecord, CheckSummary,
    SlopeFit,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::CandidateSet;
use crate::greedy::{run_greedy, run_greedy_masked, SelectionVariant, StopReason};
use crate::kernels::{KernelModel, KernelRegistry};
use crate::plot::{emit_plot, PlotOutcome, Reference, Series};
use crate::targets::{power_law, SynthesizedTarget};

/// Random `(N, K, m)` triples tested per run by the abstract product check.
pub const ABSTRACT_SAMPLES: usize = 200;
const ABSTRACT_SEED: u64 = 0x5eed;

/// Candidates, target values and selection mask shared by the rules.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kernel: KernelModel,
    /// The domain `Omega`.
    pub domain: CandidateSet,
    pub f_domain: Vec<f64>,
    /// `Omega` plus its projection onto the slice, with the slice mask.
    pub sliced: Option<(CandidateSet, Vec<f64>, Vec<bool>)>,
    pub f_norm_sq: Option<f64>,
}

enum Target {
    PowerLaw(f64),
    Synthesized(SynthesizedTarget),
    Given,
}

impl Target {
    fn values(&self, cands: &CandidateSet) -> Result<Vec<f64>> {
        match self {
            Target::PowerLaw(a) => power_law(cands, *a),
            Target::Synthesized(t) => t.values_on(cands),
            Target::Given => Err(invalid("csv targets have no values off their point list")),
        }
    }
}

/// Reads `x_1,...,x_d,f` rows.
fn load_target_csv(path: &Path, dim: usize) -> Result<(CandidateSet, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            k => Error::Parse(format!("{}: {k:?}", path.display())),
        })?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.len() != dim + 1 {
            return Err(Error::Parse(format!(
                "{} row {}: expected {} columns, got {}",
                path.display(),
                i + 1,
                dim + 1,
                rec.len()
            )));
        }
        let row = rec
            .iter()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), i + 1)))?;
        values.push(row[dim]);
        points.push(row[..dim].to_vec());
    }
    let raw = points.len();
    let cands = CandidateSet::from_points(points)?;
    if cands.len() != raw {
        return Err(invalid(format!(
            "{}: duplicate points in target file",
            path.display()
        )));
    }
    Ok((cands, values))
}

impl Problem {
    /// `base` resolves relative paths inside the config (the config's directory).
    pub fn build(cfg: &ExperimentConfig, registry: &KernelRegistry, base: &Path) -> Result<Self> {
        let kernel = registry.get(&cfg.kernel.name)?;
        let d = &cfg.domain;
        kernel.check_dim(d.dim)?;
        let (target, domain, f_domain) = match &cfg.target {
            TargetConfig::Csv { path } => {
                let (c, f) = load_target_csv(&base.join(path), d.dim)?;
                (Target::Given, c, f)
            }
            other => {
                let domain = match d.grid_resolution {
                    Some(r) => CandidateSet::uniform_grid(r, d.dim)?,
                    None => CandidateSet::sample_random(d.seed, d.count.unwrap_or(0), d.dim)?,
                };
                let target = match other {
                    TargetConfig::PowerLaw { alpha } => Target::PowerLaw(*alpha),
                    TargetConfig::Synthesized {
                        centers_seed,
                        center_count,
                        coeff_seed,
                    } => Target::Synthesized(SynthesizedTarget::random(
                        &kernel,
                        d.dim,
                        *centers_seed,
                        *center_count,
                        *coeff_seed,
                    )?),
                    TargetConfig::Csv { .. } => unreachable!(),
                };
                let f = target.values(&domain)?;
                (target, domain, f)
            }
        };
        let sliced = match d.slice {
            Some(s) if cfg.rules.iter().any(|r| r.restrict_to_slice) => {
                let cands = domain.union(&domain.project_to_slice(s.axis, s.value)?)?;
                let mask = cands.points().map(|p| p[s.axis] == s.value).collect();
                let f = target.values(&cands)?;
                Some((cands, f, mask))
            }
            _ => None,
        };
        let f_norm_sq = match &target {
            Target::Synthesized(t) => Some(t.norm_sq()),
            _ => None,
        };
        Ok(Problem {
            kernel,
            domain,
            f_domain,
            sliced,
            f_norm_sq,
        })
    }
}

/// Runs every rule of the config, in parallel, in config order.
pub fn run_rules(cfg: &ExperimentConfig, problem: &Problem) -> Result<Vec<TraceFile>> {
    let stop = cfg.stop.criteria()?;
    cfg.rules
        .par_iter()
        .map(|r| {
            let rule = r.selection_rule()?;
            let trace = if r.restrict_to_slice {
                let (cands, f, mask) = problem
                    .sliced
                    .as_ref()
                    .ok_or_else(|| invalid("rule is restricted but the domain has no slice"))?;
                run_greedy_masked(&problem.kernel, cands, f, mask, &rule, &stop)?
            } else {
                run_greedy(
                    &problem.kernel,
                    &problem.domain,
                    &problem.f_domain,
                    &rule,
                    &stop,
                )?
            };
            let label = r.label();
            log::info!(
                "{label}: {} points, stopped by {}",
                trace.final_state.n,
                trace.meta.stop_reason
            );
            if trace.meta.stop_reason == StopReason::Breakdown {
                log::warn!("{label}: numerical breakdown, see trace warnings");
            }
            Ok(TraceFile {
                label,
                trace,
                f_norm_sq: problem.f_norm_sq,
            })
        })
        .collect()
}

/// Every applicable check on one trace. Checks that cannot run are described
/// in the returned notices. Record names are prefixed with `label:`.
pub fn check_trace(file: &TraceFile) -> Result<(Vec<CheckRecord>, Vec<String>)> {
    let t = &file.trace;
    let label = &file.label;
    let mut records = abstract_product_sweep(
        &t.nu(),
        &t.sigma(),
        &t.sigma(),
        ABSTRACT_SAMPLES,
        ABSTRACT_SEED,
    );
    let mut notes = Vec::new();
    if records.is_empty() {
        notes.push(format!(
            "skipped {label}: abstract_product needs at least 4 rows, trace has {}",
            t.len()
        ));
    }
    let Some(f_norm_sq) = file.f_norm_sq else {
        notes.push(format!(
            "skipped {label}: residual_product_lemma, improved_power_estimate, theorem_final need a target with known native norm"
        ));
        return Ok((prefixed(label, records), notes));
    };
    let windows: Vec<usize> = (1..).take_while(|n| 2 * n < t.len()).collect();
    if windows.is_empty() {
        notes.push(format!(
            "skipped {label}: residual_product_lemma, theorem_final need at least 3 rows"
        ));
    }
    for &n in &windows {
        records.push(check_residual_product_lemma(t, f_norm_sq, n)?);
    }
    let greedy_rule = matches!(
        t.meta.rule,
        SelectionVariant::Beta(_) | SelectionVariant::FOverP
    ) && !t.meta.restricted;
    if greedy_rule {
        records.extend(check_improved_power_estimate(t, f_norm_sq, t.meta.rule)?);
        for &n in &windows {
            records.push(check_theorem_final(t, f_norm_sq, t.meta.rule, n)?);
        }
    } else {
        notes.push(format!(
            "skipped {label}: improved_power_estimate, theorem_final apply to unrestricted greedy rules only"
        ));
    }
    Ok((prefixed(label, records), notes))
}

fn prefixed(label: &str, records: Vec<CheckRecord>) -> Vec<CheckRecord> {
    records
        .into_iter()
        .map(|mut r| {
            r.name = format!("{label}:{}", r.name);
            r
        })
        .collect()
}

pub fn check_all(files: &[TraceFile]) -> Result<(Vec<CheckRecord>, Vec<String>)> {
    let per: Vec<_> = files.par_iter().map(check_trace).collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut notes = Vec::new();
    for (r, n) in per {
        records.extend(r);
        notes.extend(n);
    }
    Ok((records, notes))
}

/// A plottable quantity of a trace: a numeric column against `n >= 1`, or
/// `<column>_gm`, the geometric-mean window series.
pub fn quantity_series(file: &TraceFile, quantity: &str) -> Result<Series> {
    let t = &file.trace;
    if let Some(col) = quantity.strip_suffix("_gm") {
        let gm = geometric_mean_series(&t.column(col)?)?;
        return Ok(Series::new(
            file.label.clone(),
            gm.iter().map(|(n, _)| *n as f64).collect(),
            gm.iter().map(|(_, v)| *v).collect(),
        ));
    }
    let values = t.column(quantity)?;
    let (ns, vs) = t
        .ns()
        .into_iter()
        .zip(values)
        .filter(|(n, _)| *n >= 1)
        .map(|(n, v)| (n as f64, v))
        .unzip();
    Ok(Series::new(file.label.clone(), ns, vs))
}

pub fn plot_quantity(
    path: impl AsRef<Path>,
    title: &str,
    files: &[TraceFile],
    quantity: &str,
    reference_slopes: &[f64],
) -> Result<PlotOutcome> {
    let series = files
        .iter()
        .map(|f| quantity_series(f, quantity))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<Reference> = reference_slopes
        .iter()
        .map(|&s| Reference::slope(s))
        .collect();
    if let Some(dir) = path.as_ref().parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    emit_plot(path, title, &series, &refs)
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub traces: Vec<TraceFile>,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    pub slopes: Vec<(String, Option<SlopeFit>)>,
    pub written: Vec<PathBuf>,
}

impl ExperimentOutcome {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn summary(&self) -> Vec<CheckSummary> {
        CheckSummary::from_records(&self.checks)
    }
}

/// Where a config's outputs go: relative paths are taken relative to `out_dir`.
fn resolve(out_dir: &Path, p: &str) -> PathBuf {
    out_dir.join(p)
}

fn write_checks_file(path: &Path, checks: &[CheckRecord], notes: &[String]) -> Result<()> {
    let mut buf = Vec::new();
    write_checks(&mut buf, checks, notes)?;
    trace_io::write_file(path, &buf)
}

/// Runs all rules, checks them, and writes traces, the checks CSV and the plots.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    config_dir: &Path,
    out_dir: &Path,
) -> Result<ExperimentOutcome> {
    let problem = Problem::build(cfg, &KernelRegistry::with_builtins(), config_dir)?;
    let traces = run_rules(cfg, &problem)?;
    let (checks, notes) = check_all(&traces)?;
    let mut written = Vec::new();
    for t in &traces {
        let p = resolve(out_dir, &cfg.trace_path(&t.label));
        save_trace(&p, t)?;
        written.push(p);
    }
    let p = resolve(out_dir, &cfg.outputs.checks_csv);
    write_checks_file(&p, &checks, &notes)?;
    written.push(p);
    let name = cfg.name.as_deref().unwrap_or("experiment");
    for q in &cfg.outputs.plot_quantities {
        let p = resolve(out_dir, &cfg.plot_path(q));
        let out = plot_quantity(
            &p,
            &format!("{name}: {q}"),
            &traces,
            q,
            &cfg.outputs.reference_slopes,
        )?;
        if out.svg.is_some() {
            written.push(p);
        }
    }
    let slopes = match cfg.outputs.slope_window {
        Some([lo, hi]) => traces
            .iter()
            .map(|t| {
                let fit = fit_loglog_slope(&t.trace.ns(), &t.trace.max_residual(), (lo, hi));
                (t.label.clone(), fit.ok())
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(ExperimentOutcome {
        traces,
        checks,
        notes,
        slopes,
        written,
    })
}

/// Runs the rules and the checks without writing anything.
pub fn verify_experiment(cfg: &ExperimentConfig, config_dir: &Path) -> Result<ExperimentOutcome> {
    let problem = Problem::build(cfg, &KernelRegistry::with_builtins(), config_dir)?;
    let traces = run_rules(cfg, &problem)?;
    verify_traces(traces)
}

/// Checks already computed traces.
pub fn verify_traces(traces: Vec<TraceFile>) -> Result<ExperimentOutcome> {
    let (checks, notes) = check_all(&traces)?;
    Ok(ExperimentOutcome {
        traces,
        checks,
        notes,
        slopes: Vec::new(),
        written: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(target: &str, rules: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{
            "name": "t",
            "kernel": {{"name": "gaussian_w2"}},
            "domain": {{"dim": 2, "count": 150, "seed": 4, "slice": {{"axis": 1, "value": 0.5}}}},
            "target": {target},
            "rules": {rules},
            "stop": {{"max_points": 20, "power_tol": 1e-5, "residual_tol": 0}},
            "outputs": {{"trace_csv": "tr/{{label}}.csv", "checks_csv": "checks.csv",
                        "plot_svg": "{{quantity}}.svg", "plot_quantities": ["sigma", "nu_gm"],
                        "reference_slopes": [-1]}}
        }}"#
        );
        ExperimentConfig::from_json(&text).unwrap()
    }

    const SYNTH: &str =
        r#"{"kind": "synthesized", "centers_seed": 1, "center_count": 6, "coeff_seed": 2}"#;

    #[test]
    fn synthesized_checks_all_pass() {
        let cfg = config(
            SYNTH,
            r#"[{"variant": "beta", "beta": 1}, {"variant": "f_over_p"},
                {"variant": "random", "seed": 3}, {"variant": "beta", "beta": 0, "restrict_to_slice": true}]"#,
        );
        let out = verify_experiment(&cfg, Path::new(".")).unwrap();
        assert_eq!(out.traces.len(), 4);
        assert!(out.failed_checks().next().is_none());
        let names: Vec<_> = out.summary().into_iter().map(|s| s.name).collect();
        assert!(names.iter().any(|n| n == "beta_1:theorem_final"));
        assert!(names.iter().any(|n| n == "random_3:residual_product_lemma"));
        assert!(!names.iter().any(|n| n == "random_3:theorem_final"));
        assert_eq!(out.notes.len(), 2, "{:?}", out.notes);
    }

    #[test]
    fn slice_run_selects_only_slice_points() {
        let cfg = config(
            SYNTH,
            r#"[{"variant": "beta", "beta": 0, "restrict_to_slice": true}]"#,
        );
        let out = verify_experiment(&cfg, Path::new(".")).unwrap();
        let t = &out.traces[0].trace;
        assert!(t.meta.restricted);
        assert!(t.rows.iter().all(|r| r.point[1] == 0.5));
        assert_eq!(t.meta.candidates, 300);
    }

    #[test]
    fn run_writes_all_outputs_deterministically() {
        let cfg = config(
            SYNTH,
            r#"[{"variant": "beta", "beta": 0.5}, {"variant": "random", "seed": 1}]"#,
        );
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let oa = run_experiment(&cfg, Path::new("."), a.path()).unwrap();
        run_experiment(&cfg, Path::new("."), b.path()).unwrap();
        assert_eq!(oa.written.len(), 5);
        for p in &oa.written {
            let rel = p.strip_prefix(a.path()).unwrap();
            let x = std::fs::read(p).unwrap();
            assert_eq!(
                x,
                std::fs::read(b.path().join(rel)).unwrap(),
                "{}",
                rel.display()
            );
        }
        let back = load_trace(a.path().join("tr/beta_0.5.csv")).unwrap();
        assert_eq!(back, oa.traces[0]);
    }

    #[test]
    fn csv_target() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("# x,y,f\n");
        for i in 0..30 {
            let (x, y) = (i as f64 / 29.0, ((i * 7) % 30) as f64 / 29.0);
            text.push_str(&format!("{x},{y},{}\n", x * y));
        }
        std::fs::write(dir.path().join("f.csv"), text).unwrap();
        let mut cfg = config(
            r#"{"kind": "csv", "path": "f.csv"}"#,
            r#"[{"variant": "beta", "beta": 1}]"#,
        );
        cfg.domain.slice = None;
        let out = verify_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(out.traces[0].trace.meta.candidates, 30);
        assert!(out.notes.iter().any(|n| n.contains("known native norm")));

        std::fs::write(dir.path().join("f.csv"), "0.1,0.2\n").unwrap();
        assert!(matches!(
            verify_experiment(&cfg, dir.path()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn gm_quantity_series() {
        let cfg = config(SYNTH, r#"[{"variant": "beta", "beta": 0}]"#);
        let out = verify_experiment(&cfg, Path::new(".")).unwrap();
        let f = &out.traces[0];
        let s = quantity_series(f, "nu_gm").unwrap();
        assert_eq!(s.ns.len(), (f.trace.len() - 1) / 2);
        let s = quantity_series(f, "sigma").unwrap();
        assert_eq!(s.ns[0], 1.0);
        assert!(quantity_series(f, "bogus").is_err());
    }
}
