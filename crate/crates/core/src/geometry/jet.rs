use ndarray::{Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::linalg;

/// A metric is refused when its smallest eigenvalue falls below this
/// fraction of its largest.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Metric components at a chart point with first and second derivatives.
///
/// Layout: `g[[i, j]] = g_ij`, `dg[[k, i, j]] = ∂_k g_ij`,
/// `d2g[[k, l, i, j]] = ∂_k ∂_l g_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet2 {
    g: Array2<f64>,
    dg: Array3<f64>,
    d2g: Array4<f64>,
    ginv: Array2<f64>,
}

impl MetricJet2 {
    /// Validates shapes, symmetries and positive definiteness.
    pub fn new(g: Array2<f64>, dg: Array3<f64>, d2g: Array4<f64>) -> Result<Self> {
        let n = g.nrows();
        if n < 2 {
            return Err(Error::InvalidJet(format!("dimension {n} < 2")));
        }
        if g.dim() != (n, n) || dg.dim() != (n, n, n) || d2g.dim() != (n, n, n, n) {
            return Err(Error::InvalidJet("inconsistent array shapes".into()));
        }
        if g.iter().chain(dg.iter()).chain(d2g.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidJet("non-finite entry".into()));
        }
        let tol = |scale: f64| 1e-12 * scale.max(1.0);
        let gs = linalg::max_abs(g.iter());
        let dgs = linalg::max_abs(dg.iter());
        let d2gs = linalg::max_abs(d2g.iter());
        for i in 0..n {
            for j in 0..n {
                if (g[[i, j]] - g[[j, i]]).abs() > tol(gs) {
                    return Err(Error::InvalidJet(format!("g not symmetric at ({i},{j})")));
                }
                for k in 0..n {
                    if (dg[[k, i, j]] - dg[[k, j, i]]).abs() > tol(dgs) {
                        return Err(Error::InvalidJet(format!("dg not symmetric at ({k},{i},{j})")));
                    }
                    for l in 0..n {
                        let v = d2g[[k, l, i, j]];
                        if (v - d2g[[k, l, j, i]]).abs() > tol(d2gs)
                            || (v - d2g[[l, k, i, j]]).abs() > tol(d2gs)
                        {
                            return Err(Error::InvalidJet(format!(
                                "d2g not symmetric at ({k},{l},{i},{j})"
                            )));
                        }
                    }
                }
            }
        }
        let (eig, _) = linalg::symmetric_eigen(&g);
        let (lo, hi) = (eig[0], eig[n - 1]);
        if lo <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
        }
        if lo < DEGENERACY_RATIO * hi {
            return Err(Error::SingularMetric { ratio: lo / hi });
        }
        let ginv = linalg::inverse(&g).ok_or(Error::SingularMetric { ratio: lo / hi })?;
        Ok(Self { g, dg, d2g, ginv })
    }

    /// A metric with vanishing derivatives (flat to second order).
    pub fn constant(g: Array2<f64>) -> Result<Self> {
        let n = g.nrows();
        Self::new(g, Array3::zeros((n, n, n)), Array4::zeros((n, n, n, n)))
    }

    pub fn flat(n: usize) -> Result<Self> {
        Self::constant(Array2::eye(n))
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn g(&self) -> &Array2<f64> {
        &self.g
    }

    pub fn dg(&self) -> &Array3<f64> {
        &self.dg
    }

    pub fn d2g(&self) -> &Array4<f64> {
        &self.d2g
    }

    /// `g^{ij}`.
    pub fn inverse(&self) -> &Array2<f64> {
        &self.ginv
    }

    /// The jet of `c·g`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor {c} must be positive")));
        }
        Self::new(&self.g * c, &self.dg * c, &self.d2g * c)
    }

    /// `g(u, v)` for chart vectors `u`, `v`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.g[[i, j]] * u[i] * v[j];
            }
        }
        s
    }

    /// `g^{ij} ξ_i η_j` for chart covectors.
    pub fn inner_dual(&self, xi: &[f64], eta: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.ginv[[i, j]] * xi[i] * eta[j];
            }
        }
        s
    }

    /// The vector `g^{ij} ξ_j` dual to a covector.
    pub fn raise(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.ginv[[i, j]] * xi[j]).sum::<f64>()).collect()
    }

    /// Smallest and largest eigenvalues of `g`.
    pub fn eigen_range(&self) -> (f64, f64) {
        let (eig, _) = linalg::symmetric_eigen(&self.g);
        (eig[0], eig[eig.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_indefinite_and_degenerate() {
        let indefinite = MetricJet2::constant(array![[1.0, 0.0], [0.0, -1.0]]);
        assert!(matches!(indefinite, Err(Error::NotPositiveDefinite { .. })));
        let degenerate = MetricJet2::constant(array![[1.0, 0.0], [0.0, 1e-14]]);
        assert!(matches!(degenerate, Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn rejects_asymmetric_derivatives() {
        let mut dg = Array3::zeros((2, 2, 2));
        dg[[0, 0, 1]] = 1.0;
        let r = MetricJet2::new(Array2::eye(2), dg, Array4::zeros((2, 2, 2, 2)));
        assert!(matches!(r, Err(Error::InvalidJet(_))));
    }

    #[test]
    fn rejects_dimension_one() {
        assert!(MetricJet2::flat(1).is_err());
    }

    #[test]
    fn raise_is_inverse_of_lower() {
        let jet = MetricJet2::constant(array![[4.0, 1.0], [1.0, 2.0]]).unwrap();
        let v = jet.raise(&[1.0, 0.0]);
        let back: Vec<f64> = (0..2).map(|i| (0..2).map(|j| jet.g()[[i, j]] * v[j]).sum::<f64>()).collect();
        assert!((back[0] - 1.0).abs() < 1e-14 && back[1].abs() < 1e-14);
    }
}
