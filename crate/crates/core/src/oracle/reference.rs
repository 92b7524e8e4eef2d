//! Adaptive Dormand–Prince 5(4) integration, used as the reference for the
//! fixed-step flows.

use ndarray::{Array2, Array4};

use super::naive::{naive_ricci, naive_rm_squared};
use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` with local error control
/// `|err_i| ≤ atol + rtol |y_i|`.
pub fn dormand_prince<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, rtol: f64, atol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y);
    }
    let dir = span.signum();
    let mut h = dir * (span.abs() * 1e-3).min(1e-2);
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        let last = (t + h - t1) * dir >= 0.0;
        let step = if last { t1 - t } else { h };
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let ys: Vec<f64> =
                (0..dim).map(|i| y[i] + step * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>()).collect();
            k.push(f(t + C[s] * step, &ys)?);
        }
        let y5: Vec<f64> = (0..dim).map(|i| y[i] + step * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>()).collect();
        let err = (0..dim)
            .map(|i| {
                let e = step * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>();
                let sc = atol + rtol * y[i].abs().max(y5[i].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / dim as f64;
        let err = err.sqrt();
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            if last {
                return Ok(y5);
            }
            t += step;
            y = y5;
        } else if step.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::NonConvergence { what: "adaptive integration, step size", value: step.abs() });
        }
        h = step * factor;
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::NonConvergence { what: "adaptive integration within 1e6 steps, last step", value: h.abs() });
        }
    }
    Ok(y)
}

/// `dc/dt` for `g = c · g_unit` computed from explicit constant-curvature tensors:
/// at a point where `g_unit = δ`, `R_ijkl = s(δ_ik δ_jl − δ_il δ_jk)`, and the
/// scalings `Rc(c g) = Rc(g)`, `Rm²(c g) = Rm²(g)/c`.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceAnsatz {
    ricci_11: f64,
    rm_sq_11: f64,
}

impl ReferenceAnsatz {
    pub fn new(sign: f64, dim: usize) -> Result<Self> {
        let n = dim;
        let g = Array2::<f64>::eye(n);
        let riem = Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| {
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            sign * (d(i, k) * d(j, l) - d(i, l) * d(j, k))
        });
        Ok(Self { ricci_11: naive_ricci(&riem, &g)?[[0, 0]], rm_sq_11: naive_rm_squared(&riem, &g)?[[0, 0]] })
    }

    pub fn rate(&self, alpha: f64, c: f64) -> f64 {
        -2.0 * self.ricci_11 - 0.5 * alpha * self.rm_sq_11 / c
    }

    /// `c(t)` at each requested time (ascending, starting after 0) from `c(0) = c0`.
    pub fn trajectory(&self, alpha: f64, c0: f64, times: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(times.len());
        let mut t = 0.0;
        let mut c = vec![c0];
        for &t1 in times {
            c = dormand_prince(
                |_, y| {
                    if !(y[0] > 0.0) {
                        return Err(Error::PositivityLoss(format!("reference scale {}", y[0])));
                    }
                    Ok(vec![self.rate(alpha, y[0])])
                },
                t,
                &c,
                t1,
                1e-13,
                1e-14,
            )?;
            t = t1;
            out.push(c[0]);
        }
        Ok(out)
    }
}
