//! Trace (JSON Lines) and summary (CSV) files.
//!
//! Trace lines carry the keys `k`, `step_residual`, `split_gap`,
//! `identity_residual`, `shadow_inclusion_residual` and, when the dimension
//! is within the cap, `x` and `shadow`. Floats are written with 17
//! significant digits; non-finite or unavailable values become `null`.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use adrkit::adr::{IterationRecord, IterationTrace};
use adrkit::vecspace::Vector;
use serde::Deserialize;

use crate::UsageError;

/// Header of the summary CSV written by `run`.
pub const SUMMARY_HEADER: [&str; 4] = [
    "status",
    "iterations",
    "final_step_residual",
    "final_inclusion_residual",
];

/// Round-trip float formatting shared by the JSONL and CSV writers.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "null".into(), fmt_float)
}

fn fmt_vec(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_float(*x)).collect();
    format!("[{}]", parts.join(","))
}

pub fn trace_line(r: &IterationRecord) -> String {
    let mut s = format!(
        "{{\"k\":{},\"step_residual\":{},\"split_gap\":{},\"identity_residual\":{},\"shadow_inclusion_residual\":{}",
        r.k,
        fmt_float(r.step_residual),
        fmt_float(r.split_gap),
        fmt_float(r.identity_residual),
        fmt_opt(r.shadow_inclusion_residual),
    );
    if let Some(x) = &r.x {
        let _ = write!(s, ",\"x\":{}", fmt_vec(x));
    }
    if let Some(sh) = &r.shadow {
        let _ = write!(s, ",\"shadow\":{}", fmt_vec(sh));
    }
    s.push('}');
    s
}

fn ensure_parent(path: &Path) -> std::io::Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p),
        _ => Ok(()),
    }
}

pub fn write_trace(path: &Path, trace: &IterationTrace) -> anyhow::Result<()> {
    ensure_parent(path)?;
    let mut out = String::new();
    for r in &trace.records {
        out.push_str(&trace_line(r));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// One parsed trace line.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceLine {
    pub k: usize,
    pub step_residual: Option<f64>,
    pub split_gap: Option<f64>,
    pub identity_residual: Option<f64>,
    pub shadow_inclusion_residual: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub shadow: Option<Vec<f64>>,
}

pub fn read_trace(path: &Path) -> anyhow::Result<Vec<TraceLine>> {
    let file = fs::File::open(path)
        .map_err(|e| UsageError(format!("cannot read trace {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceLine = serde_json::from_str(&line)
            .map_err(|e| UsageError(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// The stored iterates of a trace.
pub fn trace_iterates(lines: &[TraceLine]) -> anyhow::Result<Vec<Vector>> {
    if lines.is_empty() {
        return Err(UsageError("trace is empty".into()).into());
    }
    lines
        .iter()
        .map(|l| {
            l.x.as_ref()
                .map(|x| Vector::from_row_slice(x))
                .ok_or_else(|| {
                    UsageError(format!("trace line k={} has no stored iterate", l.k)).into()
                })
        })
        .collect()
}

/// `[status, iterations, final_step_residual, final_inclusion_residual]`.
pub fn summary_row(trace: &IterationTrace) -> [String; 4] {
    let last = trace.last();
    [
        trace.status.to_string(),
        trace.iterations().to_string(),
        fmt_float(last.step_residual),
        fmt_opt(last.shadow_inclusion_residual),
    ]
}

/// Appends a row, writing the header first when the file is new or empty.
pub fn append_summary(path: &Path, row: &[String; 4]) -> anyhow::Result<()> {
    ensure_parent(path)?;
    let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(SUMMARY_HEADER)?;
    }
    w.write_record(row)?;
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    ensure_parent(path)?;
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}
