//! Grid DeTurck operator with its own periodic differencing and the
//! Christoffel-difference form of the DeTurck field.

use ndarray::{Array2, Array3, Array4};

use super::naive::{
    gauss_jordan_inverse, naive_christoffel, naive_ricci, naive_riemann_lower, naive_rm_squared, RawJet,
};
use crate::error::Result;
use crate::flow::GridState;

/// Node-indexed access to a grid state through explicit multi-indices.
struct Lattice {
    shape: Vec<usize>,
    h: Vec<f64>,
}

impl Lattice {
    fn new(state: &GridState) -> Self {
        let grid = state.grid();
        let shape = grid.shape().to_vec();
        let h = (0..shape.len()).map(|a| grid.lengths()[a] / shape[a] as f64).collect();
        Self { shape, h }
    }

    fn flat(&self, idx: &[isize]) -> usize {
        let mut k = 0usize;
        for (a, &i) in idx.iter().enumerate() {
            let m = self.shape[a] as isize;
            k = k * self.shape[a] + (((i % m) + m) % m) as usize;
        }
        k
    }

    fn unflat(&self, mut k: usize) -> Vec<isize> {
        let mut idx = vec![0isize; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = (k % self.shape[a]) as isize;
            k /= self.shape[a];
        }
        idx
    }

    /// Fourth-order `∂_a` of a scalar field given by `f(node)`.
    fn d1(&self, f: &dyn Fn(usize) -> f64, idx: &[isize], a: usize) -> f64 {
        let at = |o: isize| {
            let mut j = idx.to_vec();
            j[a] += o;
            f(self.flat(&j))
        };
        (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * self.h[a])
    }

    fn d2(&self, f: &dyn Fn(usize) -> f64, idx: &[isize], a: usize, b: usize) -> f64 {
        if a == b {
            let at = |o: isize| {
                let mut j = idx.to_vec();
                j[a] += o;
                f(self.flat(&j))
            };
            return (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * self.h[a] * self.h[a]);
        }
        let w = [(-2isize, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
        let mut s = 0.0;
        for (oa, wa) in w {
            for (ob, wb) in w {
                let mut j = idx.to_vec();
                j[a] += oa;
                j[b] += ob;
                s += wa * wb * f(self.flat(&j));
            }
        }
        s / (144.0 * self.h[a] * self.h[b])
    }

    fn component(&self, field: &[f64], node: usize, i: usize, j: usize) -> f64 {
        let n = self.shape.len();
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // packed upper triangle, row by row
        let mut pos = 0;
        for r in 0..i {
            pos += n - r;
        }
        pos += j - i;
        field[node * n * (n + 1) / 2 + pos]
    }

    fn jet(&self, field: &[f64], node: usize) -> RawJet {
        let n = self.shape.len();
        let idx = self.unflat(node);
        let g = Array2::from_shape_fn((n, n), |(i, j)| self.component(field, node, i, j));
        let dg = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
            self.d1(&|m| self.component(field, m, i, j), &idx, k)
        });
        let d2g = Array4::from_shape_fn((n, n, n, n), |(k, l, i, j)| {
            self.d2(&|m| self.component(field, m, i, j), &idx, k, l)
        });
        RawJet { g, dg, d2g }
    }
}

/// `W^k = g^{pq}(Γ(g) − Γ(u))^k_pq` at every node.
pub fn naive_deturck_field(state: &GridState) -> Result<Vec<Vec<f64>>> {
    let lat = Lattice::new(state);
    let n = state.dim();
    (0..state.grid().len())
        .map(|node| {
            let gj = lat.jet(state.packed(), node);
            let uj = lat.jet(state.background_packed(), node);
            let ginv = gauss_jordan_inverse(&gj.g)?;
            let (gg, gu) = (naive_christoffel(&gj)?, naive_christoffel(&uj)?);
            Ok((0..n)
                .map(|k| {
                    let mut s = 0.0;
                    for p in 0..n {
                        for q in 0..n {
                            s += ginv[[p, q]] * (gg[[k, p, q]] - gu[[k, p, q]]);
                        }
                    }
                    s
                })
                .collect())
        })
        .collect()
}

/// `−2Rc + L_W g − (α/2)Rm²` at every node with `L_W g_ij = W^k ∂_k g_ij + g_kj ∂_i W^k + g_ik ∂_j W^k`,
/// differentiating `W^k` on the grid.
pub fn naive_grid_rhs(state: &GridState) -> Result<Vec<Array2<f64>>> {
    let lat = Lattice::new(state);
    let n = state.dim();
    let w = naive_deturck_field(state)?;
    let alpha = state.alpha;
    (0..state.grid().len())
        .map(|node| {
            let gj = lat.jet(state.packed(), node);
            let riem = naive_riemann_lower(&gj)?;
            let ric = naive_ricci(&riem, &gj.g)?;
            let rm2 = naive_rm_squared(&riem, &gj.g)?;
            let idx = lat.unflat(node);
            let dw = Array2::from_shape_fn((n, n), |(r, k)| lat.d1(&|m| w[m][k], &idx, r));
            Ok(Array2::from_shape_fn((n, n), |(i, j)| {
                let mut lie = 0.0;
                for k in 0..n {
                    lie += w[node][k] * gj.dg[[k, i, j]] + gj.g[[k, j]] * dw[[i, k]] + gj.g[[i, k]] * dw[[j, k]];
                }
                -2.0 * ric[[i, j]] + lie - 0.5 * alpha * rm2[[i, j]]
            }))
        })
        .collect()
}
