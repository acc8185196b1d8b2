//! Trace and check CSV files.
//!
//! A trace file starts with `# key=value` metadata lines followed by a CSV
//! table with header
//! `n,selected_index,x_1..x_d,nu,sigma,residual_at_selected,max_residual,criterion_value,coefficient,partial_native_norm`.
//! Floats are written as `{:.16e}`, so reading a file back reproduces the
//! trace bit for bit.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::analysis::{CheckRecord, FinalState, RunTrace, TraceMeta, TraceRow, NUMERIC_COLUMNS};
use crate::error::{Error, Result};
use crate::greedy::{SelectionVariant, StopReason};

/// A trace together with what the experiment knew about its target.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub label: String,
    pub trace: RunTrace,
    /// `|f|_H^2`, known for synthesized targets only.
    pub f_norm_sq: Option<f64>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn trace_header(dim: usize) -> Vec<String> {
    let mut h = vec!["n".to_string(), "selected_index".to_string()];
    h.extend((1..=dim).map(|i| format!("x_{i}")));
    h.extend(NUMERIC_COLUMNS.iter().map(|s| s.to_string()));
    h
}

pub fn write_trace<W: Write>(mut out: W, file: &TraceFile) -> Result<()> {
    let t = &file.trace;
    let m = &t.meta;
    writeln!(out, "# label={}", one_line(&file.label))?;
    writeln!(out, "# kernel={}", one_line(&m.kernel))?;
    writeln!(out, "# rule={}", m.rule)?;
    match m.seed {
        Some(s) => writeln!(out, "# seed={s}")?,
        None => writeln!(out, "# seed=none")?,
    }
    writeln!(out, "# dim={}", m.dim)?;
    writeln!(out, "# candidates={}", m.candidates)?;
    writeln!(out, "# restricted={}", m.restricted)?;
    writeln!(out, "# stop_reason={}", m.stop_reason)?;
    writeln!(out, "# final_n={}", t.final_state.n)?;
    writeln!(out, "# final_sigma={}", num(t.final_state.sigma))?;
    writeln!(
        out,
        "# final_max_residual={}",
        num(t.final_state.max_residual)
    )?;
    writeln!(
        out,
        "# final_partial_native_norm={}",
        num(t.final_state.partial_native_norm)
    )?;
    match file.f_norm_sq {
        Some(v) => writeln!(out, "# f_norm_sq={}", num(v))?,
        None => writeln!(out, "# f_norm_sq=none")?,
    }
    for w in &m.warnings {
        writeln!(out, "# warning={}", one_line(w))?;
    }

    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(m.dim)).map_err(csv_err)?;
    for r in &t.rows {
        let mut rec = vec![r.n.to_string(), r.selected_index.to_string()];
        rec.extend(r.point.iter().map(|&x| num(x)));
        rec.extend(
            [
                r.nu,
                r.sigma,
                r.residual_at_selected,
                r.max_residual,
                r.criterion_value,
                r.coefficient,
                r.partial_native_norm,
            ]
            .map(num),
        );
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace(path: impl AsRef<Path>, file: &TraceFile) -> Result<()> {
    let mut buf = Vec::new();
    write_trace(&mut buf, file)?;
    write_file(path, &buf)
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

/// Creates missing parent directories, then writes.
pub(crate) fn write_file(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<T: std::str::FromStr>(meta: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let v = meta
        .get(key)
        .ok_or_else(|| parse_err(format!("trace metadata lacks `{key}`")))?;
    v.parse()
        .map_err(|_| parse_err(format!("bad value `{v}` for `{key}`")))
}

fn optional<T: std::str::FromStr>(meta: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match meta.get(key).map(String::as_str) {
        None | Some("none") => Ok(None),
        Some(_) => field(meta, key).map(Some),
    }
}

pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let mut meta = BTreeMap::new();
    let mut warnings = Vec::new();
    for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
        let (k, v) = line
            .trim()
            .split_once('=')
            .ok_or_else(|| parse_err(format!("bad metadata line `#{line}`")))?;
        if k == "warning" {
            warnings.push(v.to_string());
        } else {
            meta.insert(k.to_string(), v.to_string());
        }
    }
    let dim: usize = field(&meta, "dim")?;
    let rule: SelectionVariant = field(&meta, "rule")?;
    let stop_reason: StopReason = field(&meta, "stop_reason")?;

    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != trace_header(dim) {
        return Err(parse_err(format!("unexpected trace header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let f = |j: usize| -> Result<f64> {
            rec[j]
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("row {i}: bad number `{}`", &rec[j])))
        };
        let u = |j: usize| -> Result<usize> {
            rec[j]
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("row {i}: bad integer `{}`", &rec[j])))
        };
        let n = u(0)?;
        if n != i {
            return Err(parse_err(format!("row {i} has n = {n}")));
        }
        let c = 2 + dim;
        rows.push(TraceRow {
            n,
            selected_index: u(1)?,
            point: (2..c).map(f).collect::<Result<_>>()?,
            nu: f(c)?,
            sigma: f(c + 1)?,
            residual_at_selected: f(c + 2)?,
            max_residual: f(c + 3)?,
            criterion_value: f(c + 4)?,
            coefficient: f(c + 5)?,
            partial_native_norm: f(c + 6)?,
        });
    }
    let final_state = FinalState {
        n: field(&meta, "final_n")?,
        sigma: field(&meta, "final_sigma")?,
        max_residual: field(&meta, "final_max_residual")?,
        partial_native_norm: field(&meta, "final_partial_native_norm")?,
    };
    if final_state.n != rows.len() {
        return Err(parse_err(format!(
            "final_n = {} but the table has {} rows",
            final_state.n,
            rows.len()
        )));
    }
    Ok(TraceFile {
        label: meta.get("label").cloned().unwrap_or_default(),
        f_norm_sq: optional(&meta, "f_norm_sq")?,
        trace: RunTrace {
            meta: TraceMeta {
                kernel: field(&meta, "kernel")?,
                rule,
                seed: optional(&meta, "seed")?,
                dim,
                candidates: field(&meta, "candidates")?,
                restricted: field(&meta, "restricted")?,
                stop_reason,
                warnings,
            },
            rows,
            final_state,
        },
    })
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<TraceFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_trace(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub const CHECKS_HEADER: [&str; 6] = ["check_name", "n", "lhs_log", "rhs_log", "margin", "pass"];

/// Check records as CSV; `notes` become leading `#` lines.
pub fn write_checks<W: Write>(mut out: W, records: &[CheckRecord], notes: &[String]) -> Result<()> {
    for n in notes {
        writeln!(out, "# {}", one_line(n))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHECKS_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.name.clone(),
            r.n.to_string(),
            num(r.lhs_log),
            num(r.rhs_log),
            num(r.margin),
            r.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
