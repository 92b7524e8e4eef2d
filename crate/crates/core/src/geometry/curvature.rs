use ndarray::{Array2, Array3, Array4};

use super::jet::MetricJet2;
use super::sectional::Plane;
use crate::error::{Error, Result};

/// Christoffel symbols and their first coordinate derivatives.
///
/// `gamma[[k, i, j]] = Γ^k_ij`, `dgamma[[k, i, j, l]] = ∂_l Γ^k_ij`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub gamma: Array3<f64>,
    pub dgamma: Array4<f64>,
}

/// Selects how the quadratic `ΓΓ` part of the Riemann tensor enters.
///
/// Only [`CurvatureConvention::Standard`] is a curvature tensor. The corrupted
/// variant exists so that verification tooling can demonstrate that its
/// symmetry checks catch a sign error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureConvention {
    #[default]
    Standard,
    #[doc(hidden)]
    CorruptedQuadraticSign,
}

/// All pointwise curvature quantities of a metric jet.
///
/// `riem_up[[l, i, j, k]] = R^l_ijk`, `riem_low[[i, j, k, l]] = R_ijkl = g_km R^m_ijl`.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub gamma: Array3<f64>,
    pub dgamma: Array4<f64>,
    pub riem_up: Array4<f64>,
    pub riem_low: Array4<f64>,
    pub ricci: Array2<f64>,
    pub scalar: f64,
    pub rm_sq: Array2<f64>,
}

impl CurvatureBundle {
    pub fn from_jet(jet: &MetricJet2) -> Self {
        riemann(jet)
    }

    pub fn dim(&self) -> usize {
        self.ricci.nrows()
    }

    /// `R(u, v, w, z) = R_ijkl u^i v^j w^k z^l`.
    pub fn riem_eval(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let uv = u[i] * v[j];
                if uv == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        s += self.riem_low[[i, j, k, l]] * uv * w[k] * z[l];
                    }
                }
            }
        }
        s
    }
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)` and its exact derivative.
pub fn christoffel(jet: &MetricJet2) -> Christoffel {
    let n = jet.dim();
    let (dg, d2g, ginv) = (jet.dg(), jet.d2g(), jet.inverse());

    // first kind: Γ_{l,ij} and ∂_m Γ_{l,ij}
    let first = Array3::from_shape_fn((n, n, n), |(l, i, j)| {
        0.5 * (dg[[i, j, l]] + dg[[j, i, l]] - dg[[l, i, j]])
    });
    let dfirst = Array4::from_shape_fn((n, n, n, n), |(l, i, j, m)| {
        0.5 * (d2g[[m, i, j, l]] + d2g[[m, j, i, l]] - d2g[[m, l, i, j]])
    });
    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let dginv = Array3::from_shape_fn((n, n, n), |(m, k, l)| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s -= ginv[[k, a]] * dg[[m, a, b]] * ginv[[b, l]];
            }
        }
        s
    });

    let gamma = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        (0..n).map(|l| ginv[[k, l]] * first[[l, i, j]]).sum::<f64>()
    });
    let dgamma = Array4::from_shape_fn((n, n, n, n), |(k, i, j, m)| {
        (0..n)
            .map(|l| dginv[[m, k, l]] * first[[l, i, j]] + ginv[[k, l]] * dfirst[[l, i, j, m]])
            .sum::<f64>()
    });
    Christoffel { gamma, dgamma }
}

/// Full curvature bundle with the standard sign convention.
pub fn riemann(jet: &MetricJet2) -> CurvatureBundle {
    riemann_with_convention(jet, CurvatureConvention::Standard)
}

pub fn riemann_with_convention(jet: &MetricJet2, convention: CurvatureConvention) -> CurvatureBundle {
    let n = jet.dim();
    let Christoffel { gamma, dgamma } = christoffel(jet);
    let quad_sign = match convention {
        CurvatureConvention::Standard => 1.0,
        CurvatureConvention::CorruptedQuadraticSign => -1.0,
    };

    // R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_ip Γ^p_jk − Γ^l_jp Γ^p_ik
    let riem_up = Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        let linear = dgamma[[l, j, k, i]] - dgamma[[l, i, k, j]];
        let quad: f64 = (0..n)
            .map(|p| gamma[[l, i, p]] * gamma[[p, j, k]] - gamma[[l, j, p]] * gamma[[p, i, k]])
            .sum::<f64>();
        linear + quad_sign * quad
    });
    let g = jet.g();
    let riem_low = Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| {
        (0..n).map(|m| g[[k, m]] * riem_up[[m, i, j, l]]).sum::<f64>()
    });
    let (ricci, scalar) = ricci_and_scalar(&riem_up, jet);
    let rm_sq = rm_squared(&riem_low, jet);
    CurvatureBundle { gamma, dgamma, riem_up, riem_low, ricci, scalar, rm_sq }
}

/// `R_jk = R^i_ijk` and `R = g^{jk} R_jk`.
pub fn ricci_and_scalar(riem_up: &Array4<f64>, jet: &MetricJet2) -> (Array2<f64>, f64) {
    let n = jet.dim();
    let ricci = Array2::from_shape_fn((n, n), |(j, k)| (0..n).map(|i| riem_up[[i, i, j, k]]).sum::<f64>());
    let ginv = jet.inverse();
    let scalar = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| ginv[[j, k]] * ricci[[j, k]])
        .sum::<f64>();
    (ricci, scalar)
}

/// `Rm²_ij = g^{pk} g^{ql} g^{nm} R_iklm R_jpqn`, evaluated as `R_iklm R_j^{klm}`.
pub fn rm_squared(riem_low: &Array4<f64>, jet: &MetricJet2) -> Array2<f64> {
    let n = jet.dim();
    let raised = raise_last_three(riem_low, jet.inverse());
    Array2::from_shape_fn((n, n), |(i, j)| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    s += riem_low[[i, k, l, m]] * raised[[j, k, l, m]];
                }
            }
        }
        s
    })
}

/// `T_j^{abc} = g^{ap} g^{bq} g^{cr} T_jpqr`, one index at a time.
pub(crate) fn raise_last_three(t: &Array4<f64>, ginv: &Array2<f64>) -> Array4<f64> {
    let n = ginv.nrows();
    let a = Array4::from_shape_fn((n, n, n, n), |(j, p, q, c)| {
        (0..n).map(|r| ginv[[c, r]] * t[[j, p, q, r]]).sum::<f64>()
    });
    let b = Array4::from_shape_fn((n, n, n, n), |(j, p, bb, c)| {
        (0..n).map(|q| ginv[[bb, q]] * a[[j, p, q, c]]).sum::<f64>()
    });
    Array4::from_shape_fn((n, n, n, n), |(j, aa, bb, c)| {
        (0..n).map(|p| ginv[[aa, p]] * b[[j, p, bb, c]]).sum::<f64>()
    })
}

/// `K_P = R(u, v, u, v) / (|u|²|v|² − ⟨u, v⟩²)`.
pub fn sectional_curvature(bundle: &CurvatureBundle, jet: &MetricJet2, plane: &Plane) -> Result<f64> {
    let (u, v) = (plane.u(), plane.v());
    if u.len() != jet.dim() {
        return Err(Error::DimensionMismatch { expected: jet.dim(), found: u.len() });
    }
    let uu = jet.inner(u, u);
    let vv = jet.inner(v, v);
    let uv = jet.inner(u, v);
    let gram = uu * vv - uv * uv;
    if !(gram > 1e-12 * uu * vv) {
        return Err(Error::DegeneratePlane(gram));
    }
    Ok(bundle.riem_eval(u, v, u, v) / gram)
}
