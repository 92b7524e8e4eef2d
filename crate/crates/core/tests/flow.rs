mod common;

use common::*;
use ndarray::{array, Array2};
use proptest::prelude::*;
use rg2lab_core::flow::{
    ansatz_rate, grid_rhs, grid_rhs_matrices, packed_index, run_with_monitor, step_ansatz, step_grid, AnsatzKind,
    AnsatzState, FlowState, Grid, GridState, RunOptions, Termination,
};
use rg2lab_core::oracle::ReferenceAnsatz;

fn integrate(kind: AnsatzKind, n: usize, alpha: f64, c0: f64, dt: f64, steps: usize) -> Vec<f64> {
    let mut s = AnsatzState::new(kind, n, c0, alpha).unwrap();
    let mut out = vec![s.c];
    for _ in 0..steps {
        s = step_ansatz(&s, dt).unwrap();
        out.push(s.c);
    }
    out
}

#[test]
fn ricci_flow_round_sphere_law() {
    let c = integrate(AnsatzKind::Sphere, 4, 0.0, 1.0, 1e-4, 100);
    assert!((c[100] - 0.94).abs() <= 1e-10);
    for n in 2..=5 {
        let c0 = 3.0 * n as f64;
        let c = integrate(AnsatzKind::Sphere, n, 0.0, c0, 1e-3, 1000);
        assert!((c[1000] - (c0 - 2.0 * (n - 1) as f64)).abs() <= 1e-10);
    }
}

#[test]
fn ansatz_matches_reference_integrator() {
    let times: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    for (kind, sign) in [(AnsatzKind::Sphere, 1.0), (AnsatzKind::Hyperbolic, -1.0)] {
        for n in 2..=4 {
            for alpha in [-0.5, 0.5, 1.0] {
                let c0 = 4.0 * (n - 1) as f64 + 2.0;
                let reference = ReferenceAnsatz::new(sign, n).unwrap().trajectory(alpha, c0, &times).unwrap();
                let c = integrate(kind, n, alpha, c0, 1e-3, 1000);
                for (k, r) in reference.iter().enumerate() {
                    let ours = c[100 * (k + 1)];
                    assert!((ours - r).abs() <= 1e-8, "{kind:?} n={n} α={alpha} t={}: {ours} vs {r}", times[k]);
                }
            }
        }
    }
}

#[test]
fn small_alpha_perturbs_ricci_flow_linearly() {
    let base = integrate(AnsatzKind::Sphere, 3, 0.0, 8.0, 1e-3, 1000);
    let a = integrate(AnsatzKind::Sphere, 3, 1e-6, 8.0, 1e-3, 1000);
    let b = integrate(AnsatzKind::Sphere, 3, 2e-6, 8.0, 1e-3, 1000);
    let mut worst = 0.0_f64;
    for k in 1..base.len() {
        let da = a[k] - base[k];
        let db = b[k] - base[k];
        worst = worst.max((da / 1e-6).abs());
        assert!((db / da - 2.0).abs() < 1e-3, "step {k}: {da:e} {db:e}");
    }
    // |∂c/∂α| ≤ (n − 1) ∫ 1/c dt ≤ 2 · 1/4 over unit time
    assert!(worst <= 0.5, "{worst}");
}

#[test]
fn ansatz_rescaling_covariance() {
    let (n, alpha, c0) = (4, 0.7, 10.0);
    let plain = integrate(AnsatzKind::Sphere, n, alpha, c0, 1e-3, 500);
    for lam in [0.5, 2.0, 4.0] {
        let scaled = integrate(AnsatzKind::Sphere, n, lam * alpha, lam * c0, lam * 1e-3, 500);
        for (p, s) in plain.iter().zip(&scaled) {
            assert!((s - lam * p).abs() <= 1e-12 * lam * c0, "λ={lam}: {s} vs {}", lam * p);
        }
    }
}

#[test]
fn correction_weight_grows_as_the_sphere_shrinks() {
    let s = AnsatzState::new(AnsatzKind::Sphere, 3, 2.0, 0.5).unwrap();
    let trace = run_with_monitor(FlowState::Ansatz(s), &RunOptions::new(2.0, 1e-3)).unwrap();
    assert!(matches!(trace.termination, Termination::PositivityLoss { .. }));
    let w: Vec<f64> = trace.records.iter().map(|r| r.correction_ratio).collect();
    assert!(w.windows(2).all(|p| p[1] > p[0]));
    let last = trace.records.last().unwrap().c.unwrap();
    let rate = ansatz_rate(AnsatzKind::Sphere, 3, 0.5, last);
    // the α/c part dominates the Ricci part near the end
    assert!(rate.abs() > 2.0 * 2.0 * 2.0, "rate {rate} at c = {last}");
}

fn single_mode_state(m: usize, eps: f64, alpha: f64) -> GridState {
    GridState::from_fn(Grid::torus(vec![m, m]).unwrap(), alpha, move |x| {
        let w = (x[0] + 2.0 * x[1]).cos();
        Ok(array![[1.0 + eps * w, 0.5 * eps * w], [0.5 * eps * w, 1.0 - 0.3 * eps * w]])
    })
    .unwrap()
}

/// Odd and even parts in `ε` of the rhs for `g = δ + ε h`, `u = δ`, `α = 0`.
fn heat_parts(m: usize, eps: f64) -> (Vec<Array2<f64>>, Vec<Array2<f64>>, GridState) {
    let rhs = |e: f64| {
        let s = single_mode_state(m, e, 0.0).with_background(|_| Ok(Array2::eye(2))).unwrap();
        (grid_rhs_matrices(&s).unwrap(), s)
    };
    let (plus, state) = rhs(eps);
    let (minus, _) = rhs(-eps);
    let odd = plus.iter().zip(&minus).map(|(p, q)| (p - q) / (2.0 * eps)).collect();
    let even = plus.iter().zip(&minus).map(|(p, q)| (p + q) / 2.0).collect();
    (odd, even, state)
}

#[test]
fn grid_rhs_linearizes_to_heat_operator() {
    // at flat g with u = δ and α = 0 the linearization is h ↦ Δh
    let mut lin_errs = Vec::new();
    for m in [24, 48] {
        let (odd, _, state) = heat_parts(m, 1e-4);
        let mut worst = 0.0_f64;
        for (node, r) in odd.iter().enumerate() {
            let x = state.grid().coords(node);
            let w = (x[0] + 2.0 * x[1]).cos();
            let lap_h = -5.0 * array![[w, 0.5 * w], [0.5 * w, -0.3 * w]];
            worst = worst.max(max_diff(r, &lap_h));
        }
        lin_errs.push(worst);
    }
    assert!(lin_errs[0] < 5e-2, "{lin_errs:?}");
    let slope = (lin_errs[0] / lin_errs[1]).log2();
    assert!(slope >= 3.7, "{lin_errs:?}");

    let remainder: Vec<f64> = [1e-2, 5e-3]
        .iter()
        .map(|&eps| heat_parts(24, eps).1.iter().map(max_abs).fold(0.0, f64::max))
        .collect();
    let ratio = remainder[0] / remainder[1];
    assert!((ratio - 4.0).abs() < 0.1, "{remainder:?}");
}

#[test]
fn grid_rhs_is_symmetric() {
    let state = single_mode_state(16, 0.2, 0.8);
    for r in grid_rhs_matrices(&state).unwrap() {
        assert_eq!(r, r.t().to_owned());
    }
    let packed = grid_rhs(&state).unwrap();
    assert_eq!(packed.len(), 16 * 16 * 3);
    assert_eq!(packed_index(2, 1, 0), packed_index(2, 0, 1));
}

fn run_grid(state: &GridState, dt: f64, steps: usize) -> Vec<f64> {
    let mut s = state.clone();
    for _ in 0..steps {
        s = step_grid(&s, dt).unwrap();
    }
    s.packed().to_vec()
}

#[test]
fn grid_time_stepping_is_fourth_order() {
    let state = single_mode_state(12, 0.3, 0.5);
    let bound = state.stability_bound(&state.diagnostics().unwrap());
    let dt = 0.8 * bound;
    let steps = 12;
    let reference = run_grid(&state, dt / 16.0, steps * 16);
    let errs: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&k| {
            let y = run_grid(&state, dt / k as f64, steps * k);
            y.iter().zip(&reference).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .collect();
    for w in errs.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((3.7..=4.3).contains(&slope), "errors {errs:?}, slope {slope}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ansatz_rate_is_scale_covariant(c in 0.1f64..50.0, alpha in -5.0f64..5.0, lam in 0.1f64..10.0, n in 2usize..6) {
        for kind in [AnsatzKind::Sphere, AnsatzKind::Hyperbolic] {
            let a = ansatz_rate(kind, n, alpha, c);
            let b = ansatz_rate(kind, n, lam * alpha, lam * c);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
