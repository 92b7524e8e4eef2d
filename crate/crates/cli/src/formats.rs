//! Curvature and symbol tables.
//!
//! Both are comma-separated with `#` comment header lines. Numbers are written in
//! shortest round-trip exponent form.
//!
//! Curvature, one row per point, indices 1-based and `i ≤ j`:
//!
//! ```text
//! x1,..,xn,scalar,sectional_min,sectional_max,ricci_11,ricci_12,..,rm_sq_11,..
//! ```
//!
//! Symbol, long format `point,quantity,i,j,value` with quantities
//! `x` (coordinate `i`), `xi` (component `i`), `sigma` (entry `i, j`),
//! `nu_eigenvalue` (eigenvalue `i`, `j = 0` real part, `j = 1` imaginary part) and
//! `det_sigma`. Indices are 0-based.
//!
//! Verify, one row per cross-check: `check,residual,tolerance,status` with status
//! `pass` or `fail`.

use std::io::{BufRead, Write};

use anyhow::{anyhow, bail, Context, Result};
use rg2lab_core::oracle::CheckResult;

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

fn write_header<W: Write>(out: &mut W, header: &[String]) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

fn reader<R: BufRead>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input)
}

fn parse_num(s: &str, row: usize, col: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| anyhow!("row {row}: bad number `{s}` in column `{col}`"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureRow {
    pub point: Vec<f64>,
    pub scalar: f64,
    pub sectional_min: f64,
    pub sectional_max: f64,
    /// Upper triangle, row-major.
    pub ricci: Vec<f64>,
    /// Upper triangle, row-major.
    pub rm_sq: Vec<f64>,
}

fn upper_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).flat_map(|i| (i..n).map(move |j| format!("{prefix}_{}{}", i + 1, j + 1))).collect()
}

pub fn curvature_columns(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    cols.extend(["scalar", "sectional_min", "sectional_max"].map(String::from));
    cols.extend(upper_labels("ricci", n));
    cols.extend(upper_labels("rm_sq", n));
    cols
}

pub fn write_curvature_csv<W: Write>(mut out: W, header: &[String], n: usize, rows: &[CurvatureRow]) -> Result<()> {
    write_header(&mut out, header)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(curvature_columns(n))?;
    let np = n * (n + 1) / 2;
    for r in rows {
        if r.point.len() != n || r.ricci.len() != np || r.rm_sq.len() != np {
            bail!("curvature row does not match dimension {n}");
        }
        let mut rec: Vec<String> = r.point.iter().map(|x| fmt_f(*x)).collect();
        rec.extend([r.scalar, r.sectional_min, r.sectional_max].map(fmt_f));
        rec.extend(r.ricci.iter().chain(&r.rm_sq).map(|x| fmt_f(*x)));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curvature table; the dimension is taken from the `x` columns.
pub fn read_curvature_csv<R: BufRead>(input: R) -> Result<(usize, Vec<CurvatureRow>)> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    let n = headers.iter().take_while(|h| h.starts_with('x')).count();
    let expected = curvature_columns(n);
    if n < 2 || headers.iter().ne(expected.iter().map(String::as_str)) {
        bail!("unexpected curvature columns {headers:?}");
    }
    let np = n * (n + 1) / 2;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .zip(&expected)
            .map(|(s, col)| parse_num(s, k + 1, col))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(CurvatureRow {
            point: vals[..n].to_vec(),
            scalar: vals[n],
            sectional_min: vals[n + 1],
            sectional_max: vals[n + 2],
            ricci: vals[n + 3..n + 3 + np].to_vec(),
            rm_sq: vals[n + 3 + np..].to_vec(),
        });
    }
    Ok((n, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEntry {
    pub point: usize,
    pub quantity: String,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

const SYMBOL_COLUMNS: [&str; 5] = ["point", "quantity", "i", "j", "value"];
const SYMBOL_QUANTITIES: [&str; 5] = ["x", "xi", "sigma", "nu_eigenvalue", "det_sigma"];

pub fn write_symbol_csv<W: Write>(mut out: W, header: &[String], entries: &[SymbolEntry]) -> Result<()> {
    write_header(&mut out, header)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SYMBOL_COLUMNS)?;
    for e in entries {
        w.write_record([e.point.to_string(), e.quantity.clone(), e.i.to_string(), e.j.to_string(), fmt_f(e.value)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_symbol_csv<R: BufRead>(input: R) -> Result<Vec<SymbolEntry>> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(SYMBOL_COLUMNS) {
        bail!("unexpected symbol columns {headers:?}");
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        let idx = |c: usize| -> Result<usize> {
            rec[c].trim().parse().with_context(|| format!("row {row}: bad index `{}` in `{}`", &rec[c], SYMBOL_COLUMNS[c]))
        };
        let quantity = rec[1].to_string();
        if !SYMBOL_QUANTITIES.contains(&quantity.as_str()) {
            bail!("row {row}: unknown quantity `{quantity}`");
        }
        out.push(SymbolEntry { point: idx(0)?, quantity, i: idx(2)?, j: idx(3)?, value: parse_num(&rec[4], row, "value")? });
    }
    Ok(out)
}

const VERIFY_COLUMNS: [&str; 4] = ["check", "residual", "tolerance", "status"];

pub fn write_verify_csv<W: Write>(mut out: W, header: &[String], checks: &[CheckResult]) -> Result<()> {
    write_header(&mut out, header)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VERIFY_COLUMNS)?;
    for c in checks {
        let status = if c.passed { "pass" } else { "fail" };
        w.write_record([c.name.clone(), fmt_f(c.residual), fmt_f(c.tolerance), status.into()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_verify_csv<R: BufRead>(input: R) -> Result<Vec<CheckResult>> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(VERIFY_COLUMNS) {
        bail!("unexpected verify columns {headers:?}");
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        let passed = match &rec[3] {
            "pass" => true,
            "fail" => false,
            other => bail!("row {row}: status must be `pass` or `fail`, found `{other}`"),
        };
        out.push(CheckResult {
            name: rec[0].to_string(),
            residual: parse_num(&rec[1], row, "residual")?,
            tolerance: parse_num(&rec[2], row, "tolerance")?,
            passed,
        });
    }
    Ok(out)
}
