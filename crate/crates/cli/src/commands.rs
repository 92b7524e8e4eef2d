use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rg2lab_core::flow::{
    run_with_monitor, write_trace_csv, AnsatzKind, AnsatzState, FlowState, GridState, RunOptions, Termination,
};
use rg2lab_core::geometry::{family_from_name, riemann, sectional_extremes, MetricFamily};
use rg2lab_core::oracle::{run_verify, VerifyConfig};
use rg2lab_core::symbol::{
    assemble_symbol, block_decompose, classify_parabolicity, sweep_alpha, write_sweep_csv, SamplingSpec,
    THRESHOLD_TOLERANCE,
};
use rg2lab_core::{linalg, Verdict, VERSION};

use crate::config::{Command, ExperimentConfig, FlowMode, RawConfig};
use crate::formats::{write_curvature_csv, write_symbol_csv, write_verify_csv, CurvatureRow, SymbolEntry};
use crate::exit;

/// Exit status and a one-line human summary of a finished command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: u8,
    pub summary: String,
}

pub fn verdict_exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Parabolic => exit::OK,
        Verdict::BackwardParabolic => exit::BACKWARD_PARABOLIC,
        Verdict::Degenerate => exit::DEGENERATE,
        Verdict::Indefinite => exit::INDEFINITE,
    }
}

/// Loads the config file (if any), applies overrides and runs `command`, writing to
/// the configured output or to `stdout`.
pub fn run(command: Command, config: Option<&Path>, overrides: &[String], stdout: &mut dyn Write) -> Result<Outcome> {
    let mut raw = match config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    raw.apply_overrides(overrides)?;
    let cfg = ExperimentConfig::from_raw(command, &raw)?;
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            let outcome = execute(&cfg, &mut w)?;
            w.flush()?;
            Ok(outcome)
        }
        None => execute(&cfg, stdout),
    }
}

/// Header lines common to every output: tool version, command, seed, tolerances
/// and the fully resolved configuration.
pub fn header(cfg: &ExperimentConfig, tolerances: &[(&str, f64)]) -> Vec<String> {
    let mut h = vec![format!("rg2lab {VERSION} {}", cfg.command), format!("seed = {}", cfg.seed)];
    h.push(format!("tolerance.degenerate = {:e}", cfg.tolerance));
    h.extend(tolerances.iter().map(|(k, v)| format!("tolerance.{k} = {v:e}")));
    h.extend(cfg.resolved().into_iter().map(|(k, v)| format!("config.{k} = {v}")));
    h
}

pub fn execute(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let family = family_from_name(&cfg.family, cfg.dim, &cfg.params)?;
    let fam = family.as_ref();
    match cfg.command {
        Command::Curvature => curvature(cfg, fam, out),
        Command::Symbol => symbol(cfg, fam, out),
        Command::Parabolicity => parabolicity(cfg, fam, out),
        Command::Sweep => sweep(cfg, fam, out),
        Command::Flow => flow(cfg, fam, out),
        Command::Verify => verify(cfg, out),
    }
}

fn sampling(cfg: &ExperimentConfig, fam: &dyn MetricFamily) -> SamplingSpec {
    let mut spec = if cfg.points.is_empty() {
        SamplingSpec::random(fam, cfg.samples, cfg.seed)
    } else {
        SamplingSpec::at_points(cfg.points.clone(), cfg.seed)
    };
    spec.random_directions = cfg.directions;
    spec.random_planes = cfg.planes;
    spec.tolerance = cfg.tolerance;
    spec
}

fn upper(m: &ndarray::Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    (0..n).flat_map(|i| (i..n).map(move |j| m[[i, j]])).collect()
}

fn curvature(cfg: &ExperimentConfig, fam: &dyn MetricFamily, out: &mut dyn Write) -> Result<Outcome> {
    let spec = sampling(cfg, fam);
    let mut rows = Vec::with_capacity(spec.points.len());
    for x in &spec.points {
        let jet = fam.jet(x).with_context(|| format!("metric jet at {x:?}"))?;
        let b = riemann(&jet);
        let ext = sectional_extremes(&b, &jet, &[])?;
        rows.push(CurvatureRow {
            point: x.clone(),
            scalar: b.scalar,
            sectional_min: ext.min,
            sectional_max: ext.max,
            ricci: upper(&b.ricci),
            rm_sq: upper(&b.rm_sq),
        });
    }
    write_curvature_csv(out, &header(cfg, &[]), cfg.dim, &rows)?;
    let range = |f: fn(&CurvatureRow) -> f64| {
        rows.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (s_lo, s_hi) = range(|r| r.scalar);
    let (k_lo, _) = range(|r| r.sectional_min);
    let (_, k_hi) = range(|r| r.sectional_max);
    Ok(Outcome {
        exit_code: exit::OK,
        summary: format!(
            "{} points: scalar in [{s_lo:.6}, {s_hi:.6}], sectional curvature in [{k_lo:.6}, {k_hi:.6}]",
            rows.len()
        ),
    })
}

fn symbol(cfg: &ExperimentConfig, fam: &dyn MetricFamily, out: &mut dyn Write) -> Result<Outcome> {
    let spec = sampling(cfg, fam);
    let xi = cfg.xi.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; cfg.dim];
        e[0] = 1.0;
        e
    });
    let mut entries = Vec::new();
    let mut min_re = f64::INFINITY;
    for (p, x) in spec.points.iter().enumerate() {
        let jet = fam.jet(x).with_context(|| format!("metric jet at {x:?}"))?;
        let b = riemann(&jet);
        let s = assemble_symbol(&jet, &b, cfg.alpha, &xi)?;
        let nu = block_decompose(&s)?.nu;
        let eig = linalg::try_eigenvalues(&nu).ok_or_else(|| anyhow!("ν spectrum did not converge at {x:?}"))?;
        let entry = |quantity: &str, i: usize, j: usize, value: f64| SymbolEntry {
            point: p,
            quantity: quantity.into(),
            i,
            j,
            value,
        };
        entries.extend(x.iter().enumerate().map(|(i, v)| entry("x", i, 0, *v)));
        entries.extend(xi.iter().enumerate().map(|(i, v)| entry("xi", i, 0, *v)));
        entries.extend(s.sigma().indexed_iter().map(|((i, j), v)| entry("sigma", i, j, *v)));
        for (i, z) in eig.iter().enumerate() {
            entries.push(entry("nu_eigenvalue", i, 0, z.re));
            entries.push(entry("nu_eigenvalue", i, 1, z.im));
            min_re = min_re.min(z.re);
        }
        entries.push(entry("det_sigma", 0, 0, s.determinant()));
    }
    write_symbol_csv(out, &header(cfg, &[]), &entries)?;
    Ok(Outcome {
        exit_code: exit::OK,
        summary: format!("{} points, smallest real part of the ν spectrum {min_re:.6}", spec.points.len()),
    })
}

fn parabolicity(cfg: &ExperimentConfig, fam: &dyn MetricFamily, out: &mut dyn Write) -> Result<Outcome> {
    let report = classify_parabolicity(fam, cfg.alpha, &sampling(cfg, fam))?;
    out.write_all(report.to_toml_string(&header(cfg, &[]))?.as_bytes())?;
    Ok(Outcome {
        exit_code: verdict_exit_code(report.verdict),
        summary: format!(
            "verdict {}: 1+αK in [{:.6}, {:.6}]",
            report.verdict, report.min_one_plus_alpha_k, report.max_one_plus_alpha_k
        ),
    })
}

fn sweep(cfg: &ExperimentConfig, fam: &dyn MetricFamily, out: &mut dyn Write) -> Result<Outcome> {
    let res = sweep_alpha(fam, cfg.alpha_min, cfg.alpha_max, cfg.alpha_count, &sampling(cfg, fam))?;
    let mut h = header(cfg, &[("threshold_bracket", THRESHOLD_TOLERANCE)]);
    h.extend(res.crossings.iter().map(|c| format!("crossing: quantity={} alpha={:e} width={:e}", c.quantity, c.alpha, c.width)));
    write_sweep_csv(out, &h, &res.rows)?;
    let list = res.crossings.iter().map(|c| format!("{:.6} ({})", c.alpha, c.quantity)).collect::<Vec<_>>();
    Ok(Outcome {
        exit_code: exit::OK,
        summary: if list.is_empty() {
            format!("{} couplings, no threshold crossings", cfg.alpha_count)
        } else {
            format!("{} couplings, thresholds at α = {}", cfg.alpha_count, list.join(", "))
        },
    })
}

fn flow(cfg: &ExperimentConfig, fam: &dyn MetricFamily, out: &mut dyn Write) -> Result<Outcome> {
    let (initial, dt) = match cfg.flow_mode {
        FlowMode::Ansatz => {
            let kind = match fam.name() {
                "sphere" => AnsatzKind::Sphere,
                "hyperbolic" => AnsatzKind::Hyperbolic,
                other => bail!("the ansatz flow needs the sphere or hyperbolic family, not `{other}` (grid flows use flow_mode = grid)"),
            };
            let r = cfg.params.first().copied().unwrap_or(1.0);
            let c0 = cfg.c0.unwrap_or(r * r);
            (FlowState::Ansatz(AnsatzState::new(kind, cfg.dim, c0, cfg.alpha)?), cfg.dt.unwrap_or(1e-3))
        }
        FlowMode::Grid => {
            let s = GridState::from_family(fam, cfg.grid.clone(), cfg.alpha)?;
            let dt = match cfg.dt {
                Some(dt) => dt,
                None => 0.5 * s.stability_bound(&s.diagnostics()?),
            };
            (FlowState::Grid(s), dt)
        }
    };
    let opts = RunOptions {
        t_end: cfg.t_end,
        dt,
        monitor_every: cfg.monitor_every,
        allow_non_parabolic: cfg.allow_non_parabolic,
        tolerance: cfg.tolerance,
    };
    let trace = run_with_monitor(initial, &opts)?;
    let mut h = header(cfg, &[]);
    h.push(format!("dt = {dt:e}"));
    write_trace_csv(out, &h, &trace)?;
    let last_t = trace.records.last().map(|r| r.t).unwrap_or(0.0);
    let (exit_code, summary) = match &trace.termination {
        Termination::Completed => (exit::OK, format!("completed at t = {last_t:.6}")),
        Termination::PositivityLoss { t, detail } => (exit::FLOW_STOPPED, format!("positivity lost at t = {t:.6}: {detail}")),
        Termination::ParabolicityLoss { t, verdict, .. } => {
            (exit::FLOW_STOPPED, format!("parabolicity lost at t = {t:.6} (verdict {verdict})"))
        }
    };
    Ok(Outcome { exit_code, summary: format!("{} records, {summary}", trace.records.len()) })
}

fn verify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let report = run_verify(&VerifyConfig {
        family: cfg.family.clone(),
        dim: cfg.dim,
        params: cfg.params.clone(),
        alpha: cfg.alpha,
        seed: cfg.seed,
        points: cfg.verify_points,
        convention: cfg.convention,
    })?;
    write_verify_csv(out, &header(cfg, &[]), &report.checks)?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(if failed.is_empty() {
        Outcome { exit_code: exit::OK, summary: format!("all {} checks passed", report.checks.len()) }
    } else {
        Outcome { exit_code: exit::VERIFY_FAILED, summary: format!("failed checks: {}", failed.join(", ")) }
    })
}
