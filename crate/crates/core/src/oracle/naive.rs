//! Literal tensor formulas evaluated with plain loops. Nothing here calls into
//! the main curvature code.

use ndarray::{Array2, Array3, Array4};

use crate::error::{Error, Result};

/// Gauss–Jordan inversion with partial pivoting.
pub fn gauss_jordan_inverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[[r, col]].abs() > m[[piv, col]].abs() {
                piv = r;
            }
        }
        if m[[piv, col]].abs() <= 1e-14 * scale {
            return Err(Error::SingularMetric { ratio: m[[piv, col]].abs() / scale.max(f64::MIN_POSITIVE) });
        }
        for c in 0..n {
            m.swap([col, c], [piv, c]);
            inv.swap([col, c], [piv, c]);
        }
        let d = m[[col, col]];
        for c in 0..n {
            m[[col, c]] /= d;
            inv[[col, c]] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[[r, col]];
                for c in 0..n {
                    m[[r, c]] -= f * m[[col, c]];
                    inv[[r, c]] -= f * inv[[col, c]];
                }
            }
        }
    }
    Ok(inv)
}

/// Positive definiteness by attempting a Cholesky factorization.
pub fn is_positive_definite(a: &Array2<f64>) -> bool {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(s > 0.0) {
                    return false;
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    true
}

/// Raw metric 2-jet: `g_ij`, `dg[k,i,j] = ∂_k g_ij`, `d2g[k,l,i,j] = ∂_k∂_l g_ij`.
#[derive(Debug, Clone)]
pub struct RawJet {
    pub g: Array2<f64>,
    pub dg: Array3<f64>,
    pub d2g: Array4<f64>,
}

impl RawJet {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn from_jet(jet: &crate::geometry::MetricJet2) -> Self {
        Self { g: jet.g().clone(), dg: jet.dg().clone(), d2g: jet.d2g().clone() }
    }

    /// `self + s·other`, component by component.
    pub fn add_scaled(&self, s: f64, other: &RawJet) -> Self {
        Self { g: &self.g + &(s * &other.g), dg: &self.dg + &(s * &other.dg), d2g: &self.d2g + &(s * &other.d2g) }
    }
}

/// `Γ^k_ij` as `[k, i, j]`.
pub fn naive_christoffel(j: &RawJet) -> Result<Array3<f64>> {
    let n = j.dim();
    let ginv = gauss_jordan_inverse(&j.g)?;
    let mut out = Array3::zeros((n, n, n));
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += 0.5 * ginv[[k, l]] * (j.dg[[a, b, l]] + j.dg[[b, a, l]] - j.dg[[l, a, b]]);
                }
                out[[k, a, b]] = s;
            }
        }
    }
    Ok(out)
}

/// `∂_r Γ^k_ij` as `[r, k, i, j]`.
pub fn naive_christoffel_derivative(j: &RawJet) -> Result<Array4<f64>> {
    let n = j.dim();
    let ginv = gauss_jordan_inverse(&j.g)?;
    let mut out = Array4::zeros((n, n, n, n));
    for r in 0..n {
        // ∂_r g^{kl} = −g^{ka} ∂_r g_ab g^{bl}
        let mut dginv = Array2::<f64>::zeros((n, n));
        for k in 0..n {
            for l in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        dginv[[k, l]] -= ginv[[k, a]] * j.dg[[r, a, b]] * ginv[[b, l]];
                    }
                }
            }
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        let first = j.dg[[a, b, l]] + j.dg[[b, a, l]] - j.dg[[l, a, b]];
                        let second = j.d2g[[r, a, b, l]] + j.d2g[[r, b, a, l]] - j.d2g[[r, l, a, b]];
                        s += 0.5 * dginv[[k, l]] * first + 0.5 * ginv[[k, l]] * second;
                    }
                    out[[r, k, a, b]] = s;
                }
            }
        }
    }
    Ok(out)
}

/// All-lower Riemann tensor straight from the metric:
///
/// ```text
/// R_ijkl = ½(∂_j∂_k g_il + ∂_i∂_l g_jk − ∂_i∂_k g_jl − ∂_j∂_l g_ik)
///        + g_pq (Γ^p_jk Γ^q_il − Γ^p_ik Γ^q_jl)
/// ```
pub fn naive_riemann_lower(j: &RawJet) -> Result<Array4<f64>> {
    let n = j.dim();
    let gam = naive_christoffel(j)?;
    let d2 = &j.d2g;
    let mut out = Array4::zeros((n, n, n, n));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.5 * (d2[[b, c, a, d]] + d2[[a, d, b, c]] - d2[[a, c, b, d]] - d2[[b, d, a, c]]);
                    for p in 0..n {
                        for q in 0..n {
                            v += j.g[[p, q]] * (gam[[p, b, c]] * gam[[q, a, d]] - gam[[p, a, c]] * gam[[q, b, d]]);
                        }
                    }
                    out[[a, b, c, d]] = v;
                }
            }
        }
    }
    Ok(out)
}

/// `R^l_ijk = g^{lm} R_ijmk`, layout `[l, i, j, k]`.
pub fn naive_riemann_up(j: &RawJet) -> Result<Array4<f64>> {
    let n = j.dim();
    let low = naive_riemann_lower(j)?;
    let ginv = gauss_jordan_inverse(&j.g)?;
    let mut out = Array4::zeros((n, n, n, n));
    for l in 0..n {
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        out[[l, i, jj, k]] += ginv[[l, m]] * low[[i, jj, m, k]];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Ric_jk = g^{ia} R_ijak`.
pub fn naive_ricci(riem: &Array4<f64>, g: &Array2<f64>) -> Result<Array2<f64>> {
    let n = g.nrows();
    let ginv = gauss_jordan_inverse(g)?;
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            for i in 0..n {
                for a in 0..n {
                    out[[j, k]] += ginv[[i, a]] * riem[[i, j, a, k]];
                }
            }
        }
    }
    Ok(out)
}

/// `Rm²_ij = g^{pk} g^{ql} g^{nm} R_iklm R_jpqn`, one loop per index.
pub fn naive_rm_squared(riem: &Array4<f64>, g: &Array2<f64>) -> Result<Array2<f64>> {
    let n = g.nrows();
    let gi = gauss_jordan_inverse(g)?;
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for p in 0..n {
                for k in 0..n {
                    for q in 0..n {
                        for l in 0..n {
                            for nn in 0..n {
                                for m in 0..n {
                                    s += gi[[p, k]] * gi[[q, l]] * gi[[nn, m]] * riem[[i, k, l, m]] * riem[[j, p, q, nn]];
                                }
                            }
                        }
                    }
                }
            }
            out[[i, j]] = s;
        }
    }
    Ok(out)
}

/// Largest violation of the four algebraic Riemann identities, relative to `max|R|`.
///
/// Checked: antisymmetry in the first pair, in the second pair, pair symmetry,
/// and the first Bianchi identity.
pub fn riemann_identity_residuals(r: &Array4<f64>) -> [f64; 4] {
    let n = r.shape()[0];
    let scale = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut res = [0.0_f64; 4];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r[[i, j, k, l]];
                    res[0] = res[0].max((v + r[[j, i, k, l]]).abs());
                    res[1] = res[1].max((v + r[[i, j, l, k]]).abs());
                    res[2] = res[2].max((v - r[[k, l, i, j]]).abs());
                    res[3] = res[3].max((v + r[[j, k, i, l]] + r[[k, i, j, l]]).abs());
                }
            }
        }
    }
    if scale > 0.0 {
        for v in &mut res {
            *v /= scale;
        }
    }
    res
}

/// DeTurck RG-2 operator `−2Rc + L_W g − (α/2)Rm²` at a point, from the 2-jets of
/// `g` and of the background `u`, with `W^k = g^{pq}(Γ(g) − Γ(u))^k_pq` and
/// `L_W g_ij = W^k ∂_k g_ij + g_kj ∂_i W^k + g_ik ∂_j W^k`.
pub fn naive_deturck_operator(g: &RawJet, u: &RawJet, alpha: f64) -> Result<Array2<f64>> {
    let n = g.dim();
    let riem = naive_riemann_lower(g)?;
    let ric = naive_ricci(&riem, &g.g)?;
    let rm2 = naive_rm_squared(&riem, &g.g)?;
    let ginv = gauss_jordan_inverse(&g.g)?;
    let gam_g = naive_christoffel(g)?;
    let gam_u = naive_christoffel(u)?;
    let dgam_g = naive_christoffel_derivative(g)?;
    let dgam_u = naive_christoffel_derivative(u)?;
    let mut w = vec![0.0; n];
    let mut dw = Array2::<f64>::zeros((n, n)); // [r, k] = ∂_r W^k
    for k in 0..n {
        for p in 0..n {
            for q in 0..n {
                w[k] += ginv[[p, q]] * (gam_g[[k, p, q]] - gam_u[[k, p, q]]);
            }
        }
    }
    for r in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    let mut dginv = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            dginv -= ginv[[p, a]] * g.dg[[r, a, b]] * ginv[[b, q]];
                        }
                    }
                    s += dginv * (gam_g[[k, p, q]] - gam_u[[k, p, q]])
                        + ginv[[p, q]] * (dgam_g[[r, k, p, q]] - dgam_u[[r, k, p, q]]);
                }
            }
            dw[[r, k]] = s;
        }
    }
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut lie = 0.0;
            for k in 0..n {
                lie += w[k] * g.dg[[k, i, j]] + g.g[[k, j]] * dw[[i, k]] + g.g[[i, k]] * dw[[j, k]];
            }
            out[[i, j]] = -2.0 * ric[[i, j]] + lie - 0.5 * alpha * rm2[[i, j]];
        }
    }
    Ok(out)
}
