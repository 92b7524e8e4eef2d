use ndarray::{s, Array2, Array4};

use super::index::IndexMap;
use crate::error::{Error, Result};
use crate::geometry::{frame_transform_rank4, CurvatureBundle, Frame, MetricJet2};
use crate::linalg;

/// Tolerance, relative to `max|Σ|`, for the exact-zero and identity block checks.
const BLOCK_TOL: f64 = 1e-12;

/// The symbol matrix `Σ_A^B` together with the frame it was assembled in.
#[derive(Debug, Clone)]
pub struct SymbolMatrix {
    sigma: Array2<f64>,
    index_map: IndexMap,
    alpha: f64,
    frame: Frame,
    riem_frame: Array4<f64>,
}

impl SymbolMatrix {
    pub fn sigma(&self) -> &Array2<f64> {
        &self.sigma
    }

    pub fn index_map(&self) -> &IndexMap {
        &self.index_map
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// `R_abcd` in the frame used for assembly.
    pub fn riem_frame(&self) -> &Array4<f64> {
        &self.riem_frame
    }

    pub fn dim(&self) -> usize {
        self.index_map.dim()
    }

    pub fn identity_block(&self) -> Array2<f64> {
        let n = self.dim();
        self.sigma.slice(s![..n, ..n]).to_owned()
    }

    pub fn lambda_block(&self) -> Array2<f64> {
        let n = self.dim();
        self.sigma.slice(s![..n, n..]).to_owned()
    }

    pub fn mu_block(&self) -> Array2<f64> {
        let n = self.dim();
        self.sigma.slice(s![n.., ..n]).to_owned()
    }

    pub fn nu_block(&self) -> Array2<f64> {
        let n = self.dim();
        self.sigma.slice(s![n.., n..]).to_owned()
    }

    pub fn determinant(&self) -> f64 {
        linalg::determinant(&self.sigma)
    }

    /// Applies `Σ` to a symmetric tensor given in frame components.
    pub fn apply(&self, h_frame: &Array2<f64>) -> Array2<f64> {
        let v = self.index_map.to_vector(h_frame);
        let out: Vec<f64> = (0..v.len()).map(|a| (0..v.len()).map(|b| self.sigma[[a, b]] * v[b]).sum()).collect();
        self.index_map.to_tensor(&out)
    }

    /// Applies `Σ` to a symmetric tensor in chart components and returns chart
    /// components, using `F⁻¹ = g Fᵀ` for the orthonormal frame `F`.
    pub fn apply_chart(&self, jet: &MetricJet2, h: &Array2<f64>) -> Array2<f64> {
        let f = self.frame.vectors();
        let h_frame = f.dot(h).dot(&f.t());
        let out = self.apply(&h_frame);
        let coframe = jet.g().dot(&f.t());
        coframe.dot(&out).dot(&coframe.t())
    }
}

/// Evaluates the symbol on `h`, everything in orthonormal frame components with
/// `ξ = e_1`.
pub fn symbol_action(r: &Array4<f64>, alpha: f64, h: &Array2<f64>) -> Array2<f64> {
    let n = h.nrows();
    let half = 0.5 * alpha;
    Array2::from_shape_fn((n, n), |(i, j)| {
        let mut v = h[[i, j]];
        for u in 0..n {
            if j == 0 {
                for k in 0..n {
                    v += half * r[[i, k, 0, u]] * h[[k, u]];
                }
            }
            v -= half * r[[i, 0, 0, u]] * h[[j, u]];
            if i == 0 {
                for k in 0..n {
                    v += half * r[[j, k, 0, u]] * h[[k, u]];
                }
            }
            v -= half * r[[j, 0, 0, u]] * h[[i, u]];
        }
        v
    })
}

/// Builds the frame with `e_1` dual to `ξ` (normalized to unit g-length) and fills
/// `Σ` column by column from basis perturbations.
pub fn assemble_symbol(jet: &MetricJet2, bundle: &CurvatureBundle, alpha: f64, xi: &[f64]) -> Result<SymbolMatrix> {
    if xi.len() != jet.dim() {
        return Err(Error::DimensionMismatch { expected: jet.dim(), found: xi.len() });
    }
    let norm2 = jet.inner_dual(xi, xi);
    if !(norm2 > 0.0) || xi.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let frame = Frame::from_covector(jet, xi)?;
    let riem_frame = frame_transform_rank4(&bundle.riem_low, &frame);
    Ok(assemble_symbol_in_frame(riem_frame, frame, alpha))
}

/// Assembly from curvature already expressed in an orthonormal frame.
pub fn assemble_symbol_in_frame(riem_frame: Array4<f64>, frame: Frame, alpha: f64) -> SymbolMatrix {
    let n = frame.dim();
    let index_map = IndexMap::new(n);
    let size = index_map.len();
    let mut sigma = Array2::zeros((size, size));
    for b in 0..size {
        let out = symbol_action(&riem_frame, alpha, &index_map.basis_tensor(b));
        for a in 0..size {
            let (i, j) = index_map.pair(a);
            sigma[[a, b]] = out[[i, j]];
        }
    }
    SymbolMatrix { sigma, index_map, alpha, frame, riem_frame }
}

/// Row positions grouped by case: `(1,1)`; `(1,j)` with `j ≥ 2`; `(i,j)` with `i, j ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRows {
    pub case1: Vec<usize>,
    pub case2: Vec<usize>,
    pub case3: Vec<usize>,
}

/// Splits the rows of `Σ` into the three index cases and checks every entry
/// against the case formulas
///
/// ```text
/// (1,1):  h_11 + α R_1k1u h_ku
/// (1,j):  h_1j + (α/2) R_jk1u h_ku,          k ≥ 2
/// (i,j):  h_ij + (α/2) R_1i1u h_ju + (α/2) R_1j1u h_iu
/// ```
pub fn case_split_rows(symbol: &SymbolMatrix) -> Result<CaseRows> {
    let map = symbol.index_map();
    let r = symbol.riem_frame();
    let alpha = symbol.alpha();
    let sigma = symbol.sigma();
    let size = map.len();
    let tol = BLOCK_TOL * linalg::max_abs(sigma.iter()).max(1.0);

    // coefficient of column (a, b) in Σ_{k,u} c(k,u) h_ku with h = E_ab + E_ba
    let pair_sum = |a: usize, b: usize, c: &dyn Fn(usize, usize) -> f64| {
        if a == b {
            c(a, a)
        } else {
            c(a, b) + c(b, a)
        }
    };

    let mut rows = CaseRows { case1: vec![], case2: vec![], case3: vec![] };
    for row in 0..size {
        let (i, j) = map.pair(row);
        for col in 0..size {
            let (a, b) = map.pair(col);
            let delta = if row == col { 1.0 } else { 0.0 };
            let expected = if i == 0 && j == 0 {
                delta + alpha * pair_sum(a, b, &|k, u| r[[0, k, 0, u]])
            } else if i == 0 {
                delta
                    + 0.5 * alpha * pair_sum(a, b, &|k, u| if k >= 1 { r[[j, k, 0, u]] } else { 0.0 })
            } else {
                // h_ju with (j,u) ∈ {(a,b),(b,a)}, likewise h_iu
                let pick = |fixed: usize, other: usize| -> f64 {
                    let mut s = 0.0;
                    if a == fixed {
                        s += r[[0, other, 0, b]];
                    }
                    if b == fixed && a != b {
                        s += r[[0, other, 0, a]];
                    }
                    s
                };
                delta + 0.5 * alpha * pick(j, i) + 0.5 * alpha * pick(i, j)
            };
            let residual = (sigma[[row, col]] - expected).abs();
            if residual > tol {
                return Err(Error::CaseMismatch { row: (i, j), residual });
            }
        }
        match (i, j) {
            (0, 0) => rows.case1.push(row),
            (0, _) => rows.case2.push(row),
            _ => rows.case3.push(row),
        }
    }
    Ok(rows)
}

/// The four blocks of `Σ = [[I, λ], [μ, ν]]`.
#[derive(Debug, Clone)]
pub struct SymbolBlocks {
    pub identity: Array2<f64>,
    pub lambda: Array2<f64>,
    pub mu: Array2<f64>,
    pub nu: Array2<f64>,
}

/// Splits `Σ` at row/column `n`, requiring `μ = 0` and the top-left block to be
/// the identity (both to `1e-12 · max|Σ|`).
pub fn block_decompose(symbol: &SymbolMatrix) -> Result<SymbolBlocks> {
    let tol = BLOCK_TOL * linalg::max_abs(symbol.sigma().iter()).max(1.0);
    let mu = symbol.mu_block();
    let mu_max = linalg::max_abs(mu.iter());
    if mu_max > tol {
        return Err(Error::NonzeroMuBlock(mu_max));
    }
    let identity = symbol.identity_block();
    let n = symbol.dim();
    let id_dev = linalg::max_abs((&identity - &Array2::<f64>::eye(n)).iter());
    if id_dev > tol {
        return Err(Error::IdentityBlock(id_dev));
    }
    Ok(SymbolBlocks { identity, lambda: symbol.lambda_block(), mu, nu: symbol.nu_block() })
}

/// Frame rotation diagonalizing `M_mn = R_1m1n` (`m, n ≥ 2`).
#[derive(Debug, Clone)]
pub struct Diagonalization {
    /// Orthogonal `(n−1) × (n−1)`; column `a` is the new `e_{a+2}` in old frame components.
    pub rotation: Array2<f64>,
    /// Eigenvalues of `M`, ascending.
    pub kappa: Vec<f64>,
    pub frame: Frame,
    pub riem_frame: Array4<f64>,
}

/// Rotates `e_2..e_n` so that `R_1m1n` becomes diagonal; `e_1` is untouched.
pub fn diagonalize_r1m1n(riem_frame: &Array4<f64>, frame: &Frame) -> Diagonalization {
    let n = frame.dim();
    let m = Array2::from_shape_fn((n - 1, n - 1), |(a, b)| riem_frame[[0, a + 1, 0, b + 1]]);
    let (kappa, rotation) = linalg::symmetric_eigen(&m);
    let mut full = Array2::zeros((n, n));
    full[[0, 0]] = 1.0;
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            full[[a + 1, b + 1]] = rotation[[b, a]];
        }
    }
    let riem_rot = frame_transform_rank4(riem_frame, &Frame::from_rows(full));
    Diagonalization { frame: frame.rotate_tail(&rotation), rotation, kappa, riem_frame: riem_rot }
}

/// The explicit 6×6 `ν` for `n = 4`, columns ordered `h22, h23, h24, h33, h34, h44`.
pub fn golden_nu_4d(riem_frame: &Array4<f64>, alpha: f64) -> Result<Array2<f64>> {
    let n = riem_frame.shape()[0];
    if n != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: n });
    }
    // 1-based component access
    let r = |a: usize, b: usize, c: usize, d: usize| riem_frame[[a - 1, b - 1, c - 1, d - 1]];
    let a = alpha;
    let h = 0.5 * alpha;
    let nu = [
        [1.0 + a * r(1, 2, 1, 2), a * r(1, 2, 1, 3), a * r(1, 2, 1, 4), 0.0, 0.0, 0.0],
        [
            h * r(1, 3, 1, 2),
            1.0 + h * (r(1, 3, 1, 3) + r(1, 2, 1, 2)),
            h * r(1, 3, 1, 4),
            h * r(1, 2, 1, 3),
            h * r(1, 2, 1, 4),
            0.0,
        ],
        [
            h * r(1, 2, 1, 4),
            h * r(1, 3, 1, 4),
            1.0 + h * (r(1, 2, 1, 2) + r(1, 4, 1, 4)),
            0.0,
            h * r(1, 2, 1, 3),
            h * r(1, 2, 1, 4),
        ],
        [0.0, a * r(1, 2, 1, 3), 0.0, 1.0 + a * r(1, 3, 1, 3), a * r(1, 3, 1, 4), 0.0],
        [
            0.0,
            h * r(1, 2, 1, 4),
            h * r(1, 2, 1, 3),
            h * r(1, 3, 1, 4),
            1.0 + h * (r(1, 3, 1, 3) + r(1, 4, 1, 4)),
            h * r(1, 3, 1, 4),
        ],
        [0.0, 0.0, a * r(1, 2, 1, 4), 0.0, a * r(1, 3, 1, 4), 1.0 + a * r(1, 4, 1, 4)],
    ];
    Ok(Array2::from_shape_fn((6, 6), |(i, j)| nu[i][j]))
}
