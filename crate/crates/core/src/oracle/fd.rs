//! Finite-difference variations and the plane-wave reconstruction of the symbol.

use ndarray::{Array2, Array3, Array4, ArrayD};

use super::naive::{
    gauss_jordan_inverse, is_positive_definite, naive_deturck_operator, naive_ricci, naive_riemann_lower,
    naive_riemann_up, naive_rm_squared, RawJet,
};
use crate::error::{Error, Result};
use crate::geometry::{Frame, MetricFamily, MetricJet2};

/// Metric functionals with finite-difference variations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// `R^l_ijk`, layout `[l, i, j, k]`.
    RiemannUp,
    /// `R_ijkl`.
    RiemannLower,
    Ricci,
    RmSquared,
    InverseMetric,
}

fn evaluate(f: Functional, j: &RawJet) -> Result<ArrayD<f64>> {
    Ok(match f {
        Functional::RiemannUp => naive_riemann_up(j)?.into_dyn(),
        Functional::RiemannLower => naive_riemann_lower(j)?.into_dyn(),
        Functional::Ricci => naive_ricci(&naive_riemann_lower(j)?, &j.g)?.into_dyn(),
        Functional::RmSquared => naive_rm_squared(&naive_riemann_lower(j)?, &j.g)?.into_dyn(),
        Functional::InverseMetric => gauss_jordan_inverse(&j.g)?.into_dyn(),
    })
}

fn central<F>(base: &RawJet, h: &RawJet, eps: f64, f: &F) -> Result<ArrayD<f64>>
where
    F: Fn(&RawJet) -> Result<ArrayD<f64>>,
{
    let plus = base.add_scaled(eps, h);
    let minus = base.add_scaled(-eps, h);
    for (s, j) in [("+", &plus), ("-", &minus)] {
        if !is_positive_definite(&j.g) {
            return Err(Error::PositivityLoss(format!("g {s} εh is not positive definite (ε = {eps:e})")));
        }
    }
    Ok((f(&plus)? - f(&minus)?) / (2.0 * eps))
}

/// Central difference in `ε` at `ε` and `ε/2`, combined by Richardson extrapolation.
pub fn richardson<F>(base: &RawJet, h: &RawJet, eps: f64, f: F) -> Result<ArrayD<f64>>
where
    F: Fn(&RawJet) -> Result<ArrayD<f64>>,
{
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::InvalidParameter(format!("ε = {eps:e} outside (0, 1e-2]")));
    }
    let coarse = central(base, h, eps, &f)?;
    let fine = central(base, h, 0.5 * eps, &f)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `d/dε F(g + εh)` at `ε = 0`, with `h` given as a 2-jet.
pub fn fd_variation(f: Functional, jet: &MetricJet2, h: &RawJet, eps: f64) -> Result<ArrayD<f64>> {
    if h.dim() != jet.dim() {
        return Err(Error::DimensionMismatch { expected: jet.dim(), found: h.dim() });
    }
    richardson(&RawJet::from_jet(jet), h, eps, |j| evaluate(f, j))
}

/// A constant perturbation (vanishing derivatives).
pub fn constant_perturbation(h: Array2<f64>) -> RawJet {
    let n = h.nrows();
    RawJet { g: h, dg: Array3::zeros((n, n, n)), d2g: Array4::zeros((n, n, n, n)) }
}

/// Metric 2-jet from five-point central differences of `family.metric` with
/// step `step` (fourth order in `step`).
pub fn fd_metric_jet(family: &dyn MetricFamily, x: &[f64], step: f64) -> Result<RawJet> {
    const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
    const FIRST: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
    const SECOND: [f64; 4] = [-1.0, 16.0, 16.0, -1.0];
    let n = family.dim();
    let at = |dx: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, d) in dx {
            y[k] += d * step;
        }
        family.metric(&y)
    };
    let g = family.metric(x)?;
    let mut dg = Array3::zeros((n, n, n));
    let mut d2g = Array4::zeros((n, n, n, n));
    for k in 0..n {
        let mut first = Array2::<f64>::zeros((n, n));
        let mut second = -30.0 * &g;
        for (o, (w1, w2)) in OFFSETS.iter().zip(FIRST.iter().zip(SECOND)) {
            let m = at(&[(k, *o)])?;
            first = first + *w1 * &m;
            second = second + w2 * &m;
        }
        for i in 0..n {
            for j in 0..n {
                dg[[k, i, j]] = first[[i, j]] / (12.0 * step);
                d2g[[k, k, i, j]] = second[[i, j]] / (12.0 * step * step);
            }
        }
        for l in k + 1..n {
            let mut mixed = Array2::<f64>::zeros((n, n));
            for (a, wa) in OFFSETS.iter().zip(FIRST) {
                for (b, wb) in OFFSETS.iter().zip(FIRST) {
                    mixed = mixed + wa * wb * &at(&[(k, *a), (l, *b)])?;
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let v = mixed[[i, j]] / (144.0 * step * step);
                    d2g[[k, l, i, j]] = v;
                    d2g[[l, k, i, j]] = v;
                }
            }
        }
    }
    Ok(RawJet { g, dg, d2g })
}

/// `h(x) = h₀ cos(λ ξ·x + φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWavePerturbation {
    pub amplitude: Array2<f64>,
    pub direction: Vec<f64>,
    pub frequency: f64,
    pub phase: f64,
}

impl PlaneWavePerturbation {
    pub fn new(amplitude: Array2<f64>, direction: Vec<f64>, frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) {
            return Err(Error::InvalidParameter(format!("frequency {frequency} must be positive")));
        }
        if amplitude.nrows() != direction.len() {
            return Err(Error::DimensionMismatch { expected: direction.len(), found: amplitude.nrows() });
        }
        Ok(Self { amplitude, direction, frequency, phase: 0.0 })
    }

    /// Shifts the phase so that the crest `cos = 1` sits at `x0`.
    pub fn crest_at(mut self, x0: &[f64]) -> Self {
        let dot: f64 = self.direction.iter().zip(x0).map(|(a, b)| a * b).sum();
        self.phase = -self.frequency * dot;
        self
    }

    /// The 2-jet of `h` at `x`.
    pub fn jet_at(&self, x: &[f64]) -> RawJet {
        let n = self.direction.len();
        let lam = self.frequency;
        let xi = &self.direction;
        let arg = lam * xi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.phase;
        let (s, c) = arg.sin_cos();
        let h0 = &self.amplitude;
        RawJet {
            g: c * h0,
            dg: Array3::from_shape_fn((n, n, n), |(k, i, j)| -lam * xi[k] * s * h0[[i, j]]),
            d2g: Array4::from_shape_fn((n, n, n, n), |(k, l, i, j)| -lam * lam * xi[k] * xi[l] * c * h0[[i, j]]),
        }
    }
}

/// Frequencies used by [`symbol_from_plane_waves`].
pub const PLANE_WAVE_FREQUENCIES: [f64; 3] = [16.0, 32.0, 64.0];
/// Largest acceptable residual of the fit in `1/λ`.
pub const PLANE_WAVE_FIT_TOLERANCE: f64 = 1e-2;

/// Least-squares line `y = a + b s`; returns `(a, b, max residual)`.
fn fit_line(s: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = s.len() as f64;
    let sm = s.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = s.iter().map(|v| (v - sm) * (v - sm)).sum();
    let sxy: f64 = s.iter().zip(y).map(|(a, b)| (a - sm) * (b - ym)).sum();
    let b = sxy / sxx;
    let a = ym - b * sm;
    let res = s.iter().zip(y).map(|(si, yi)| (yi - a - b * si).abs()).fold(0.0, f64::max);
    (a, b, res)
}

/// Reconstructs the symbol matrix by perturbing with plane waves of each frame
/// basis tensor along `ξ` and measuring the response of the full nonlinear DeTurck
/// RG-2 operator (background `u = g`).
///
/// Entry `(A, B)` is the `λ → ∞` limit of `−λ⁻² [Dℒ(h_B wave)]_A`, fitted linearly
/// in `1/λ` over [`PLANE_WAVE_FREQUENCIES`]. `frame` must be g-orthonormal with
/// `e_1` dual to `ξ`; by default it is built from `ξ`.
pub fn symbol_from_plane_waves(
    jet: &MetricJet2,
    alpha: f64,
    xi: &[f64],
    frame: Option<&Frame>,
) -> Result<Array2<f64>> {
    let n = jet.dim();
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: xi.len() });
    }
    let owned;
    let frame = match frame {
        Some(f) => f,
        None => {
            owned = Frame::from_covector(jet, xi)?;
            &owned
        }
    };
    let f = frame.vectors();
    let g = jet.g();
    let coframe = g.dot(&f.t()); // column a: e^a as a covector
    // unit covector dual to e_1
    let xi_unit: Vec<f64> = (0..n).map(|i| coframe[[i, 0]]).collect();

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let size = pairs.len();
    let base = RawJet::from_jet(jet);
    let x0 = vec![0.0; n];
    let mut sigma = Array2::zeros((size, size));
    let mut worst = 0.0_f64;
    for (col, &(a, b)) in pairs.iter().enumerate() {
        // frame tensor E_ab + E_ba (just E_aa on the diagonal), in chart components
        let h0 = Array2::from_shape_fn((n, n), |(i, j)| {
            let mut v = coframe[[i, a]] * coframe[[j, b]];
            if a != b {
                v += coframe[[i, b]] * coframe[[j, a]];
            }
            v
        });
        let mut samples = vec![Vec::new(); size];
        for lam in PLANE_WAVE_FREQUENCIES {
            let wave = PlaneWavePerturbation::new(h0.clone(), xi_unit.clone(), lam)?.crest_at(&x0);
            let hj = wave.jet_at(&x0);
            let eps = 1e-2 / (lam * lam);
            let resp = richardson(&base, &hj, eps, |j| Ok(naive_deturck_operator(j, &base, alpha)?.into_dyn()))?;
            let resp = resp.into_dimensionality::<ndarray::Ix2>().map_err(|e| Error::Format(e.to_string()))?;
            let frame_resp = f.dot(&resp).dot(&f.t());
            for (row, &(i, j)) in pairs.iter().enumerate() {
                samples[row].push(-frame_resp[[i, j]] / (lam * lam));
            }
        }
        let inv: Vec<f64> = PLANE_WAVE_FREQUENCIES.iter().map(|l| 1.0 / l).collect();
        for row in 0..size {
            let (lim, _, res) = fit_line(&inv, &samples[row]);
            worst = worst.max(res);
            sigma[[row, col]] = lim;
        }
    }
    if worst > PLANE_WAVE_FIT_TOLERANCE {
        return Err(Error::NonConvergence { what: "plane-wave fit", value: worst });
    }
    Ok(sigma)
}

/// Helper for tests: `ArrayD` to `Array2`.
pub fn as_matrix(a: ArrayD<f64>) -> Result<Array2<f64>> {
    let shape = a.shape().to_vec();
    a.into_dimensionality().map_err(|_| Error::ValenceMismatch(format!("expected a matrix, got shape {shape:?}")))
}
