//! Analytic metric families with exact 2-jets.

use std::f64::consts::TAU;
use std::fmt;

use ndarray::{Array1, Array2, Array3, Array4};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::jet::MetricJet2;
use crate::error::{Error, Result};

pub const FAMILY_NAMES: &[&str] =
    &["flat", "sphere", "hyperbolic", "product", "warped", "conformal", "perturbed"];

/// A metric given in closed form on a chart, evaluable with exact derivatives.
pub trait MetricFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    /// Metric components only, without derivatives.
    fn metric(&self, x: &[f64]) -> Result<Array2<f64>>;
    fn jet(&self, x: &[f64]) -> Result<MetricJet2>;
    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec<f64>;
    /// True when the chart is the torus `[0, 2π)^n`.
    fn is_periodic(&self) -> bool {
        false
    }
    /// Sectional curvature if it is the same for every plane at every point.
    fn constant_curvature(&self) -> Option<f64> {
        None
    }
}

/// Builds a family from its name and parameter list.
///
/// | name | parameters | metric |
/// |------|------------|--------|
/// | `flat` | – | `δ` |
/// | `sphere` | `[r=1]` | round `S^n(r)`, stereographic chart |
/// | `hyperbolic` | `[r=1]` | Poincaré ball of curvature `−1/r²` |
/// | `product` | `[n1=n/2, r1=1, r2=1]` | `S^{n1}(r1) × S^{n−n1}(r2)` |
/// | `warped` | `[a=0.3]` | diagonal torus metric `g_ii = exp(2 f_i)` |
/// | `conformal` | `[a_1=0.3, a_2.., ]` | `exp(2 Σ a_b cos x_b) δ` on the torus |
/// | `perturbed` | `[a=0.1, seed=1]` | dense periodic perturbation of `δ` |
pub fn family_from_name(name: &str, dim: usize, params: &[f64]) -> Result<Box<dyn MetricFamily>> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dimension {dim} < 2")));
    }
    let get = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
    let positive = |what: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")))
        }
    };
    let kind = match name {
        "flat" => Kind::Flat,
        "sphere" => Kind::Sphere { r: positive("radius", get(0, 1.0))? },
        "hyperbolic" => Kind::Hyperbolic { r: positive("radius", get(0, 1.0))? },
        "product" => {
            let n1 = get(0, (dim / 2) as f64);
            if n1.fract() != 0.0 || n1 < 1.0 || n1 as usize >= dim {
                return Err(Error::InvalidParameter(format!(
                    "product split n1 = {n1} must be an integer in [1, {}]",
                    dim - 1
                )));
            }
            Kind::Product {
                n1: n1 as usize,
                r1: positive("radius", get(1, 1.0))?,
                r2: positive("radius", get(2, 1.0))?,
            }
        }
        "warped" => {
            let a = get(0, 0.3);
            let c = Array2::from_shape_fn((dim, dim), |(i, b)| {
                (1.3 * (i + 1) as f64 + 0.7 * (b + 1) as f64).cos()
            });
            let psi = Array2::from_shape_fn((dim, dim), |(i, b)| 0.9 * i as f64 + 1.7 * b as f64);
            Kind::Warped { a, c, psi }
        }
        "conformal" => {
            let a = if params.is_empty() {
                let mut a = vec![0.0; dim];
                a[0] = 0.3;
                a
            } else if params.len() <= dim {
                let mut a = params.to_vec();
                a.resize(dim, 0.0);
                a
            } else {
                return Err(Error::InvalidParameter(format!(
                    "conformal takes at most {dim} amplitudes"
                )));
            };
            Kind::Conformal { a }
        }
        "perturbed" => {
            let a = get(0, 0.1);
            let seed = get(1, 1.0);
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(Error::InvalidParameter(format!("seed {seed} must be a non-negative integer")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let scale = 1.0 / (2.0 * dim as f64);
            let sym = |rng: &mut ChaCha8Rng| {
                let mut m = Array2::zeros((dim, dim));
                for i in 0..dim {
                    for j in i..dim {
                        let v = scale * rng.random_range(-1.0..1.0);
                        m[[i, j]] = v;
                        m[[j, i]] = v;
                    }
                }
                m
            };
            let b: Vec<Array2<f64>> = (0..dim).map(|_| sym(&mut rng)).collect();
            let c: Vec<Array2<f64>> = (0..dim).map(|_| sym(&mut rng)).collect();
            let d = sym(&mut rng);
            let theta: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..TAU)).collect();
            Kind::Perturbed { a, b, c, d, theta }
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    Ok(Box::new(AnalyticFamily { n: dim, kind, params: params.to_vec() }))
}

#[derive(Debug, Clone)]
enum Kind {
    Flat,
    Sphere { r: f64 },
    Hyperbolic { r: f64 },
    Product { n1: usize, r1: f64, r2: f64 },
    Warped { a: f64, c: Array2<f64>, psi: Array2<f64> },
    Conformal { a: Vec<f64> },
    Perturbed { a: f64, b: Vec<Array2<f64>>, c: Vec<Array2<f64>>, d: Array2<f64>, theta: Vec<f64> },
}

#[derive(Debug, Clone)]
struct AnalyticFamily {
    n: usize,
    kind: Kind,
    params: Vec<f64>,
}

/// Value, gradient and Hessian of a scalar function at a point.
struct Scalar2 {
    value: f64,
    grad: Array1<f64>,
    hess: Array2<f64>,
}

/// `φ = ln(2r²) − ln(r² + σ|x|²)` on the coordinate block `range`; σ = +1 gives the
/// stereographic sphere, σ = −1 the Poincaré ball.
fn space_form_factor(x: &[f64], n: usize, range: std::ops::Range<usize>, r: f64, sigma: f64) -> Result<Scalar2> {
    let s: f64 = x[range.clone()].iter().map(|v| v * v).sum();
    let den = r * r + sigma * s;
    if !(den > 1e-12 * r * r) {
        return Err(Error::InvalidParameter(format!(
            "point lies outside the chart (|x|² = {s}, r = {r})"
        )));
    }
    let mut grad = Array1::zeros(n);
    let mut hess = Array2::zeros((n, n));
    for k in range.clone() {
        grad[k] = -2.0 * sigma * x[k] / den;
        for l in range.clone() {
            let delta = if k == l { 1.0 } else { 0.0 };
            hess[[k, l]] = -2.0 * sigma * delta / den + 4.0 * x[k] * x[l] / (den * den);
        }
    }
    Ok(Scalar2 { value: (2.0 * r * r).ln() - den.ln(), grad, hess })
}

/// Jet of the diagonal metric `g_ii = exp(2 f_i)`.
fn diagonal_exp_jet(f: &[Scalar2]) -> Result<MetricJet2> {
    let n = f.len();
    let mut g = Array2::zeros((n, n));
    let mut dg = Array3::zeros((n, n, n));
    let mut d2g = Array4::zeros((n, n, n, n));
    for (i, fi) in f.iter().enumerate() {
        let gi = (2.0 * fi.value).exp();
        g[[i, i]] = gi;
        for k in 0..n {
            dg[[k, i, i]] = 2.0 * fi.grad[k] * gi;
            for l in 0..n {
                d2g[[k, l, i, i]] = (4.0 * fi.grad[k] * fi.grad[l] + 2.0 * fi.hess[[k, l]]) * gi;
            }
        }
    }
    MetricJet2::new(g, dg, d2g)
}

impl AnalyticFamily {
    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite chart point".into()));
        }
        Ok(())
    }

    fn diagonal_factors(&self, x: &[f64]) -> Result<Option<Vec<Scalar2>>> {
        let n = self.n;
        let zero = || Scalar2 { value: 0.0, grad: Array1::zeros(n), hess: Array2::zeros((n, n)) };
        let factors = match &self.kind {
            Kind::Flat => (0..n).map(|_| zero()).collect(),
            Kind::Sphere { r } => {
                (0..n).map(|_| space_form_factor(x, n, 0..n, *r, 1.0)).collect::<Result<_>>()?
            }
            Kind::Hyperbolic { r } => {
                (0..n).map(|_| space_form_factor(x, n, 0..n, *r, -1.0)).collect::<Result<_>>()?
            }
            Kind::Product { n1, r1, r2 } => (0..n)
                .map(|i| {
                    if i < *n1 {
                        space_form_factor(x, n, 0..*n1, *r1, 1.0)
                    } else {
                        space_form_factor(x, n, *n1..n, *r2, 1.0)
                    }
                })
                .collect::<Result<_>>()?,
            Kind::Warped { a, c, psi } => (0..n)
                .map(|i| {
                    let mut f = zero();
                    for b in 0..n {
                        let arg = x[b] + psi[[i, b]];
                        f.value += a * c[[i, b]] * arg.cos();
                        f.grad[b] = -a * c[[i, b]] * arg.sin();
                        f.hess[[b, b]] = -a * c[[i, b]] * arg.cos();
                    }
                    f
                })
                .collect(),
            Kind::Conformal { a } => {
                let mut f = zero();
                for b in 0..n {
                    f.value += a[b] * x[b].cos();
                    f.grad[b] = -a[b] * x[b].sin();
                    f.hess[[b, b]] = -a[b] * x[b].cos();
                }
                (0..n)
                    .map(|_| Scalar2 { value: f.value, grad: f.grad.clone(), hess: f.hess.clone() })
                    .collect()
            }
            Kind::Perturbed { .. } => return Ok(None),
        };
        Ok(Some(factors))
    }
}

impl MetricFamily for AnalyticFamily {
    fn name(&self) -> &'static str {
        match self.kind {
            Kind::Flat => "flat",
            Kind::Sphere { .. } => "sphere",
            Kind::Hyperbolic { .. } => "hyperbolic",
            Kind::Product { .. } => "product",
            Kind::Warped { .. } => "warped",
            Kind::Conformal { .. } => "conformal",
            Kind::Perturbed { .. } => "perturbed",
        }
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn params(&self) -> Vec<f64> {
        self.params.clone()
    }

    fn metric(&self, x: &[f64]) -> Result<Array2<f64>> {
        self.check_point(x)?;
        let n = self.n;
        let conformal = |phi: f64| Array2::eye(n) * (2.0 * phi).exp();
        let stereo = |xs: &[f64], r: f64, sigma: f64| {
            let s: f64 = xs.iter().map(|v| v * v).sum();
            let den = r * r + sigma * s;
            if den > 1e-12 * r * r {
                Ok(4.0 * r.powi(4) / (den * den))
            } else {
                Err(Error::InvalidParameter("point lies outside the chart".into()))
            }
        };
        Ok(match &self.kind {
            Kind::Flat => Array2::eye(n),
            Kind::Sphere { r } => Array2::eye(n) * stereo(x, *r, 1.0)?,
            Kind::Hyperbolic { r } => Array2::eye(n) * stereo(x, *r, -1.0)?,
            Kind::Product { n1, r1, r2 } => {
                let (f1, f2) = (stereo(&x[..*n1], *r1, 1.0)?, stereo(&x[*n1..], *r2, 1.0)?);
                Array2::from_diag(&Array1::from_shape_fn(n, |i| if i < *n1 { f1 } else { f2 }))
            }
            Kind::Warped { a, c, psi } => Array2::from_diag(&Array1::from_shape_fn(n, |i| {
                let f: f64 = (0..n).map(|b| a * c[[i, b]] * (x[b] + psi[[i, b]]).cos()).sum();
                (2.0 * f).exp()
            })),
            Kind::Conformal { a } => conformal((0..n).map(|b| a[b] * x[b].cos()).sum()),
            Kind::Perturbed { a, b, c, d, theta } => {
                let mut g = Array2::eye(n);
                let total: f64 = x.iter().sum();
                for k in 0..n {
                    g = g + &b[k] * (a * (x[k] + theta[k]).sin()) + &c[k] * (a * (2.0 * x[k]).cos());
                }
                g + d * (a * total.sin())
            }
        })
    }

    fn jet(&self, x: &[f64]) -> Result<MetricJet2> {
        self.check_point(x)?;
        if let Some(f) = self.diagonal_factors(x)? {
            return diagonal_exp_jet(&f);
        }
        let Kind::Perturbed { a, b, c, d, theta } = &self.kind else { unreachable!() };
        let n = self.n;
        let g = self.metric(x)?;
        let total: f64 = x.iter().sum();
        let mut dg = Array3::zeros((n, n, n));
        let mut d2g = Array4::zeros((n, n, n, n));
        for k in 0..n {
            let sk = (x[k] + theta[k]).sin();
            let ck = (x[k] + theta[k]).cos();
            let (s2, c2) = (2.0 * x[k]).sin_cos();
            for i in 0..n {
                for j in 0..n {
                    dg[[k, i, j]] = a * (b[k][[i, j]] * ck - 2.0 * c[k][[i, j]] * s2 + d[[i, j]] * total.cos());
                    d2g[[k, k, i, j]] += a * (-b[k][[i, j]] * sk - 4.0 * c[k][[i, j]] * c2);
                    for l in 0..n {
                        d2g[[k, l, i, j]] -= a * d[[i, j]] * total.sin();
                    }
                }
            }
        }
        MetricJet2::new(g, dg, d2g)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let n = self.n;
        match &self.kind {
            Kind::Flat => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            Kind::Sphere { r } => (0..n).map(|_| rng.random_range(-*r..*r)).collect(),
            Kind::Product { n1, r1, r2 } => (0..n)
                .map(|i| {
                    let r = if i < *n1 { *r1 } else { *r2 };
                    rng.random_range(-r..r)
                })
                .collect(),
            Kind::Hyperbolic { r } => loop {
                let p: Vec<f64> = (0..n).map(|_| rng.random_range(-0.6 * r..0.6 * r)).collect();
                if p.iter().map(|v| v * v).sum::<f64>() < 0.36 * r * r {
                    break p;
                }
            },
            _ => (0..n).map(|_| rng.random_range(0.0..TAU)).collect(),
        }
    }

    fn is_periodic(&self) -> bool {
        matches!(
            self.kind,
            Kind::Flat | Kind::Warped { .. } | Kind::Conformal { .. } | Kind::Perturbed { .. }
        )
    }

    fn constant_curvature(&self) -> Option<f64> {
        match self.kind {
            Kind::Flat => Some(0.0),
            Kind::Sphere { r } => Some(1.0 / (r * r)),
            Kind::Hyperbolic { r } => Some(-1.0 / (r * r)),
            _ => None,
        }
    }
}
