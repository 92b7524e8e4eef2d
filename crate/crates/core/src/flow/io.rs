//! Trace tables and grid snapshots.
//!
//! Trace CSV: `#` comment lines, a header row, one row per [`TraceRecord`], and a
//! final `# termination: <json-free key=value list>` comment.
//!
//! Grid snapshot (text, version 1):
//!
//! ```text
//! rg2lab-grid v1 dim=2 shape=16x16 lengths=6.283185307179586x6.283185307179586 t=0 alpha=1
//! <g_11 g_12 g_22 u_11 u_12 u_22>     one line per node, last axis fastest
//! ```

use std::io::{BufRead, Write};

use super::grid::{packed_len, GridState};
use super::monitor::{FlowTrace, Termination, TraceRecord};
use super::stencil::Grid;
use crate::error::{Error, Result};

const TRACE_COLUMNS: [&str; 13] = [
    "t",
    "step",
    "dt",
    "c",
    "min_sectional",
    "max_sectional",
    "min_1_plus_alphaK",
    "max_1_plus_alphaK",
    "scalar_min",
    "scalar_max",
    "metric_eigen_min",
    "correction_ratio",
    "verdict",
];

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

fn termination_line(t: &Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::PositivityLoss { t, detail } => {
            format!("positivity_loss t={} detail={}", fmt_f(*t), detail.replace('\n', " "))
        }
        Termination::ParabolicityLoss { t, verdict, location, min_one_plus_alpha_k } => format!(
            "parabolicity_loss t={} verdict={} min_1_plus_alphaK={} location={}",
            fmt_f(*t),
            verdict,
            fmt_f(*min_one_plus_alpha_k),
            location.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(";")
        ),
    }
}

fn parse_termination(s: &str) -> Result<Termination> {
    let bad = || Error::Format(format!("bad termination line `{s}`"));
    let mut parts = s.splitn(2, ' ');
    let kind = parts.next().unwrap_or("");
    let rest = parts.next().unwrap_or("");
    let field = |key: &str| -> Option<&str> {
        let start = rest.find(&format!("{key}="))? + key.len() + 1;
        let tail = &rest[start..];
        Some(if key == "detail" { tail } else { tail.split(' ').next().unwrap_or("") })
    };
    let num = |key: &str| -> Result<f64> { field(key).ok_or_else(bad)?.parse().map_err(|_| bad()) };
    match kind {
        "completed" => Ok(Termination::Completed),
        "positivity_loss" => Ok(Termination::PositivityLoss {
            t: num("t")?,
            detail: field("detail").ok_or_else(bad)?.to_string(),
        }),
        "parabolicity_loss" => {
            let loc = field("location").ok_or_else(bad)?;
            let location = if loc.is_empty() {
                Vec::new()
            } else {
                loc.split(';').map(|x| x.parse().map_err(|_| bad())).collect::<Result<_>>()?
            };
            Ok(Termination::ParabolicityLoss {
                t: num("t")?,
                verdict: field("verdict").ok_or_else(bad)?.parse()?,
                location,
                min_one_plus_alpha_k: num("min_1_plus_alphaK")?,
            })
        }
        _ => Err(bad()),
    }
}

pub fn write_trace_csv<W: Write>(mut out: W, header: &[String], trace: &FlowTrace) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# alpha = {}", fmt_f(trace.alpha))?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
        for r in &trace.records {
            w.write_record([
                fmt_f(r.t),
                r.step.to_string(),
                fmt_f(r.dt),
                r.c.map(fmt_f).unwrap_or_default(),
                fmt_f(r.min_sectional),
                fmt_f(r.max_sectional),
                fmt_f(r.min_one_plus_alpha_k),
                fmt_f(r.max_one_plus_alpha_k),
                fmt_f(r.scalar_min),
                fmt_f(r.scalar_max),
                fmt_f(r.metric_eigen_min),
                fmt_f(r.correction_ratio),
                r.verdict.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    writeln!(out, "# termination: {}", termination_line(&trace.termination))?;
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<FlowTrace> {
    let mut alpha = None;
    let mut termination = None;
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            if let Some(v) = c.strip_prefix("alpha = ") {
                alpha = Some(v.parse::<f64>().map_err(|_| Error::Format(format!("bad alpha `{v}`")))?);
            } else if let Some(v) = c.strip_prefix("termination: ") {
                termination = Some(parse_termination(v)?);
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    if headers.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(Error::Format(format!("unexpected trace columns {headers:?}")));
    }
    let mut records = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::Format(format!("row {}: bad value `{}` in `{}`", row + 1, &rec[i], TRACE_COLUMNS[i])))
        };
        records.push(TraceRecord {
            t: num(0)?,
            step: rec[1].parse().map_err(|_| Error::Format(format!("row {}: bad step", row + 1)))?,
            dt: num(2)?,
            c: if rec[3].is_empty() { None } else { Some(num(3)?) },
            min_sectional: num(4)?,
            max_sectional: num(5)?,
            min_one_plus_alpha_k: num(6)?,
            max_one_plus_alpha_k: num(7)?,
            scalar_min: num(8)?,
            scalar_max: num(9)?,
            metric_eigen_min: num(10)?,
            correction_ratio: num(11)?,
            verdict: rec[12].parse()?,
        });
    }
    Ok(FlowTrace {
        alpha: alpha.ok_or_else(|| Error::Format("trace lacks an alpha comment".into()))?,
        records,
        termination: termination.ok_or_else(|| Error::Format("trace lacks a termination comment".into()))?,
    })
}

pub const SNAPSHOT_MAGIC: &str = "rg2lab-grid";
pub const SNAPSHOT_VERSION: &str = "v1";

pub fn write_grid_snapshot<W: Write>(mut out: W, state: &GridState) -> Result<()> {
    let grid = state.grid();
    let join = |v: Vec<String>| v.join("x");
    writeln!(
        out,
        "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} dim={} shape={} lengths={} t={} alpha={}",
        grid.dim(),
        join(grid.shape().iter().map(|m| m.to_string()).collect()),
        join(grid.lengths().iter().map(|l| fmt_f(*l)).collect()),
        fmt_f(state.t),
        fmt_f(state.alpha),
    )?;
    let np = packed_len(grid.dim());
    let (g, u) = (state.packed(), state.background_packed());
    for node in 0..grid.len() {
        let vals: Vec<String> =
            g[node * np..(node + 1) * np].iter().chain(&u[node * np..(node + 1) * np]).map(|v| fmt_f(*v)).collect();
        writeln!(out, "{}", vals.join(" "))?;
    }
    Ok(())
}

pub fn read_grid_snapshot<R: BufRead>(input: R) -> Result<GridState> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty snapshot".into()))??;
    let mut words = header.split_whitespace();
    if words.next() != Some(SNAPSHOT_MAGIC) || words.next() != Some(SNAPSHOT_VERSION) {
        return Err(Error::Format(format!("not a {SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} snapshot")));
    }
    let mut fields = std::collections::HashMap::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| Error::Format(format!("bad header field `{w}`")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| Error::Format(format!("header lacks `{k}`")));
    let bad = |k: &str| Error::Format(format!("bad header value for `{k}`"));
    let dim: usize = get("dim")?.parse().map_err(|_| bad("dim"))?;
    let shape: Vec<usize> =
        get("shape")?.split('x').map(|s| s.parse().map_err(|_| bad("shape"))).collect::<Result<_>>()?;
    let lengths: Vec<f64> =
        get("lengths")?.split('x').map(|s| s.parse().map_err(|_| bad("lengths"))).collect::<Result<_>>()?;
    let t: f64 = get("t")?.parse().map_err(|_| bad("t"))?;
    let alpha: f64 = get("alpha")?.parse().map_err(|_| bad("alpha"))?;
    if shape.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: shape.len() });
    }
    let grid = Grid::new(shape, lengths)?;
    let np = packed_len(dim);
    let mut g = Vec::with_capacity(grid.len() * np);
    let mut u = Vec::with_capacity(grid.len() * np);
    for node in 0..grid.len() {
        let line = lines.next().ok_or_else(|| Error::Format(format!("snapshot ends before node {node}")))??;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::Format(format!("line {}: bad number `{s}`", node + 2))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * np {
            return Err(Error::Format(format!("line {}: expected {} values, found {}", node + 2, 2 * np, vals.len())));
        }
        g.extend_from_slice(&vals[..np]);
        u.extend_from_slice(&vals[np..]);
    }
    GridState::from_raw(grid, g, u, t, alpha)
}
