use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::classify::SweepRow;
use super::Verdict;
use crate::error::{Error, Result};

/// A plane attaining an extreme of `1 + αK`, spanned by chart vectors `u`, `v` at `point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWitness {
    pub point: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub sectional: f64,
}

/// Per-(point, ξ) summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub point: Vec<f64>,
    pub xi: Vec<f64>,
    pub min_one_plus_alpha_k: f64,
    pub max_one_plus_alpha_k: f64,
    pub nu_real_min: f64,
    pub det_nu: f64,
}

/// Outcome of a parabolicity classification.
///
/// `nu_eigenvalues` and `det_nu` belong to the sample whose `ν` spectrum has the
/// smallest real part. `nu_diagonal_min` is the smallest diagonal entry of `ν` in
/// the diagonalizing frames, `1 + (α/2)(κ_i + κ_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicityReport {
    pub verdict: Verdict,
    pub alpha: f64,
    pub tolerance: f64,
    pub min_one_plus_alpha_k: f64,
    pub max_one_plus_alpha_k: f64,
    pub det_nu: f64,
    pub nu_diagonal_min: f64,
    /// `[re, im]` pairs.
    pub nu_eigenvalues: Vec<[f64; 2]>,
    pub min_witness: PlaneWitness,
    pub max_witness: PlaneWitness,
    pub sample_points: Vec<SampleRecord>,
}

impl ParabolicityReport {
    /// TOML text, preceded by `header` lines written as `#` comments.
    pub fn to_toml_string(&self, header: &[String]) -> Result<String> {
        let body = toml::to_string(self).map_err(|e| Error::Format(e.to_string()))?;
        let mut out = String::new();
        for line in header {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&body);
        Ok(out)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

const SWEEP_COLUMNS: [&str; 7] = [
    "kind",
    "alpha",
    "verdict",
    "min_one_plus_alpha_k",
    "max_one_plus_alpha_k",
    "nu_real_min",
    "nu_real_max",
];

/// Comma-separated sweep table with `#` comment header lines.
pub fn write_sweep_csv<W: Write>(mut out: W, header: &[String], rows: &[SweepRow]) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.kind.clone(),
            format!("{:e}", r.alpha),
            r.verdict.to_string(),
            format!("{:e}", r.min_one_plus_alpha_k),
            format!("{:e}", r.max_one_plus_alpha_k),
            format!("{:e}", r.nu_real_min),
            format!("{:e}", r.nu_real_max),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    if headers.iter().ne(SWEEP_COLUMNS.iter().copied()) {
        return Err(Error::Format(format!("unexpected sweep columns {headers:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse().map_err(|_| Error::Format(format!("row {}: bad number `{}`", line + 1, &rec[i])))
        };
        rows.push(SweepRow {
            kind: rec[0].to_string(),
            alpha: num(1)?,
            verdict: rec[2].parse()?,
            min_one_plus_alpha_k: num(3)?,
            max_one_plus_alpha_k: num(4)?,
            nu_real_min: num(5)?,
            nu_real_max: num(6)?,
        });
    }
    Ok(rows)
}
