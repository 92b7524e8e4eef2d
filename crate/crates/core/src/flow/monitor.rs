use serde::{Deserialize, Serialize};

use super::ansatz::{step_ansatz, AnsatzState};
use super::grid::{step_grid_with, GridDiagnostics, GridState};
use crate::error::{Error, Result};
use crate::symbol::Verdict;

/// Initial data for [`run_with_monitor`].
#[derive(Debug, Clone)]
pub enum FlowState {
    Ansatz(AnsatzState),
    Grid(GridState),
}

impl FlowState {
    pub fn t(&self) -> f64 {
        match self {
            FlowState::Ansatz(s) => s.t,
            FlowState::Grid(s) => s.t,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            FlowState::Ansatz(s) => s.alpha,
            FlowState::Grid(s) => s.alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Record a trace line every this many steps (the first and last state are always recorded).
    pub monitor_every: usize,
    /// Proceed from non-parabolic initial data and through parabolicity loss.
    pub allow_non_parabolic: bool,
    /// Band around zero in which `1 + αK` counts as degenerate.
    pub tolerance: f64,
}

impl RunOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self { t_end, dt, monitor_every: 1, allow_non_parabolic: false, tolerance: 1e-9 }
    }
}

/// One monitored state. `c` is present for ansatz runs; for grid runs the
/// curvature and scalar columns are ranges over all nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub step: usize,
    pub dt: f64,
    pub c: Option<f64>,
    pub min_sectional: f64,
    pub max_sectional: f64,
    pub min_one_plus_alpha_k: f64,
    pub max_one_plus_alpha_k: f64,
    pub scalar_min: f64,
    pub scalar_max: f64,
    pub metric_eigen_min: f64,
    /// `|α| max|K| / 2`, the size of the `Rm²` term relative to the Ricci term.
    pub correction_ratio: f64,
    pub verdict: Verdict,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    PositivityLoss { t: f64, detail: String },
    ParabolicityLoss { t: f64, verdict: Verdict, location: Vec<f64>, min_one_plus_alpha_k: f64 },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::PositivityLoss { .. } => "positivity_loss",
            Termination::ParabolicityLoss { .. } => "parabolicity_loss",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub alpha: f64,
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
}

struct Observation {
    record: TraceRecord,
    location: Vec<f64>,
}

fn observe_ansatz(s: &AnsatzState, step: usize, dt: f64, tol: f64) -> Observation {
    let k = s.sectional();
    let v = s.one_plus_alpha_k();
    Observation {
        record: TraceRecord {
            t: s.t,
            step,
            dt,
            c: Some(s.c),
            min_sectional: k,
            max_sectional: k,
            min_one_plus_alpha_k: v,
            max_one_plus_alpha_k: v,
            scalar_min: s.scalar(),
            scalar_max: s.scalar(),
            metric_eigen_min: s.c,
            correction_ratio: 0.5 * (s.alpha * k).abs(),
            // ν = (1 + αK) I on constant curvature
            verdict: Verdict::from_range(v, v, v > tol, tol),
        },
        location: Vec::new(),
    }
}

fn observe_grid(s: &GridState, step: usize, dt: f64, tol: f64) -> Result<(Observation, GridDiagnostics)> {
    let d = s.diagnostics()?;
    let (lo, hi) = d.one_plus_alpha_k(s.alpha);
    let record = TraceRecord {
        t: s.t,
        step,
        dt,
        c: None,
        min_sectional: d.min_sectional,
        max_sectional: d.max_sectional,
        min_one_plus_alpha_k: lo,
        max_one_plus_alpha_k: hi,
        scalar_min: d.scalar_min,
        scalar_max: d.scalar_max,
        metric_eigen_min: d.metric_eigen_min,
        correction_ratio: 0.5 * s.alpha.abs() * d.min_sectional.abs().max(d.max_sectional.abs()),
        verdict: Verdict::from_range(lo, hi, lo > tol, tol),
    };
    Ok((Observation { record, location: s.grid().coords(d.critical_node(s.alpha)) }, d))
}

/// Integrates to `t_end` or until positivity or parabolicity fails.
///
/// Non-parabolic initial data is refused with [`Error::NotParabolic`] unless
/// `allow_non_parabolic` is set. Failures during the run end it with the trace
/// intact and the failure recorded in [`FlowTrace::termination`].
pub fn run_with_monitor(initial: FlowState, opts: &RunOptions) -> Result<FlowTrace> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) || !(opts.t_end > initial.t()) || opts.monitor_every == 0 {
        return Err(Error::InvalidParameter(format!(
            "run needs dt > 0, t_end > t0 and monitor_every ≥ 1 (dt = {}, t_end = {}, monitor_every = {})",
            opts.dt, opts.t_end, opts.monitor_every
        )));
    }
    let alpha = initial.alpha();
    let tol = opts.tolerance;
    let mut records = Vec::new();
    let mut state = initial;
    let mut step = 0usize;
    let mut dt_used = 0.0;
    let mut grid_diag = None;

    let observe = |state: &FlowState, step: usize, dt: f64, diag: &mut Option<GridDiagnostics>| {
        match state {
            FlowState::Ansatz(s) => Ok(observe_ansatz(s, step, dt, tol)),
            FlowState::Grid(s) => {
                let (o, d) = observe_grid(s, step, dt, tol)?;
                *diag = Some(d);
                Ok(o)
            }
        }
    };

    let first = observe(&state, 0, 0.0, &mut grid_diag)?;
    if first.record.verdict != Verdict::Parabolic && !opts.allow_non_parabolic {
        return Err(Error::NotParabolic(first.record.verdict));
    }
    records.push(first.record);

    let termination = loop {
        let t = state.t();
        if t >= opts.t_end * (1.0 - 1e-15) {
            break Termination::Completed;
        }
        let dt = opts.dt.min(opts.t_end - t);
        let next = match &state {
            FlowState::Ansatz(s) => step_ansatz(s, dt).map(FlowState::Ansatz),
            FlowState::Grid(s) => {
                let d = match grid_diag.take() {
                    Some(d) => d,
                    None => s.diagnostics()?,
                };
                step_grid_with(s, dt, &d).map(FlowState::Grid)
            }
        };
        let next = match next {
            Ok(n) => n,
            Err(Error::PositivityLoss(detail)) => break Termination::PositivityLoss { t: t + dt, detail },
            Err(e) => return Err(e),
        };
        step += 1;
        dt_used = dt;
        state = next;
        let last = state.t() >= opts.t_end * (1.0 - 1e-15);
        if step % opts.monitor_every == 0 || last {
            let obs = match observe(&state, step, dt, &mut grid_diag) {
                Ok(o) => o,
                Err(Error::PositivityLoss(detail)) => break Termination::PositivityLoss { t: state.t(), detail },
                Err(e) => return Err(e),
            };
            let verdict = obs.record.verdict;
            let min_v = obs.record.min_one_plus_alpha_k;
            records.push(obs.record);
            if verdict != Verdict::Parabolic && !opts.allow_non_parabolic {
                break Termination::ParabolicityLoss {
                    t: state.t(),
                    verdict,
                    location: obs.location,
                    min_one_plus_alpha_k: min_v,
                };
            }
        } else {
            grid_diag = None;
        }
    };

    // keep the last good state in the trace
    if records.last().map(|r| r.step) != Some(step) {
        if let Ok(obs) = observe(&state, step, dt_used, &mut grid_diag) {
            records.push(obs.record);
        }
    }
    Ok(FlowTrace { alpha, records, termination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{AnsatzKind, Grid};
    use ndarray::Array2;

    #[test]
    fn sphere_with_positive_coupling_runs_into_positivity_loss() {
        let s = AnsatzState::new(AnsatzKind::Sphere, 4, 1.0, 1.0).unwrap();
        let trace = run_with_monitor(FlowState::Ansatz(s), &RunOptions::new(1.0, 1e-3)).unwrap();
        assert!(matches!(trace.termination, Termination::PositivityLoss { .. }));
        let cs: Vec<f64> = trace.records.iter().map(|r| r.c.unwrap()).collect();
        assert!(cs.windows(2).all(|w| w[1] < w[0]));
        assert!(trace.records.windows(2).all(|w| w[1].t > w[0].t));
        // K = 1/c grows, so 1 + αK grows and the correction term gains weight
        let v: Vec<f64> = trace.records.iter().map(|r| r.min_one_plus_alpha_k).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let w: Vec<f64> = trace.records.iter().map(|r| r.correction_ratio).collect();
        assert!(w.windows(2).all(|w| w[1] > w[0]));
        assert!(trace.records.iter().all(|r| r.verdict == Verdict::Parabolic));
    }

    #[test]
    fn degenerate_hyperbolic_start_is_refused() {
        let s = AnsatzState::new(AnsatzKind::Hyperbolic, 3, 1.0, 1.0).unwrap();
        let r = run_with_monitor(FlowState::Ansatz(s), &RunOptions::new(0.1, 1e-3));
        assert!(matches!(r, Err(Error::NotParabolic(Verdict::Degenerate))));
        let opts = RunOptions { allow_non_parabolic: true, ..RunOptions::new(0.1, 1e-2) };
        let trace = run_with_monitor(FlowState::Ansatz(s), &opts).unwrap();
        assert_eq!(trace.termination, Termination::Completed);
        assert_eq!(trace.records[0].verdict, Verdict::Degenerate);
    }

    #[test]
    fn backward_start_is_refused() {
        let s = AnsatzState::new(AnsatzKind::Sphere, 4, 1.0, -2.0).unwrap();
        let r = run_with_monitor(FlowState::Ansatz(s), &RunOptions::new(0.1, 1e-3));
        assert!(matches!(r, Err(Error::NotParabolic(Verdict::BackwardParabolic))));
    }

    #[test]
    fn shrinking_sphere_with_negative_coupling_loses_parabolicity() {
        // 1 + αK = 1 − 1/c starts at 1/2 and crosses zero when c reaches 1
        let s = AnsatzState::new(AnsatzKind::Sphere, 3, 2.0, -1.0).unwrap();
        let trace = run_with_monitor(FlowState::Ansatz(s), &RunOptions::new(2.0, 1e-3)).unwrap();
        match trace.termination {
            Termination::ParabolicityLoss { t, verdict, .. } => {
                assert!(t > 0.0 && t < 2.0);
                assert_ne!(verdict, Verdict::Parabolic);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flat_torus_trace_is_constant() {
        let g = GridState::from_fn(Grid::torus(vec![8, 8]).unwrap(), 3.0, |_| Ok(Array2::eye(2))).unwrap();
        let opts = RunOptions { monitor_every: 2, ..RunOptions::new(0.05, 0.01) };
        let trace = run_with_monitor(FlowState::Grid(g), &opts).unwrap();
        assert_eq!(trace.termination, Termination::Completed);
        assert!(trace.records.len() >= 3);
        for r in &trace.records {
            assert_eq!(r.min_one_plus_alpha_k, 1.0);
            assert_eq!(r.max_one_plus_alpha_k, 1.0);
            assert!((r.metric_eigen_min - 1.0).abs() < 1e-14);
        }
    }
}
