use ndarray::{Array2, Array3, Array4};
use rayon::prelude::*;

use super::rk4::rk4_step;
use super::stencil::Grid;
use crate::error::{Error, Result};
use crate::geometry::{christoffel, riemann, sectional_extremes, MetricFamily, MetricJet2};
use crate::linalg;

/// Safety factor in the explicit step bound.
pub const STABILITY_FACTOR: f64 = 0.1;

/// Number of independent components of a symmetric `n × n` matrix.
pub fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(i, j)` in the packed upper triangle, row by row.
pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

pub fn pack(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(packed_len(n));
    for i in 0..n {
        for j in i..n {
            out.push(0.5 * (m[[i, j]] + m[[j, i]]));
        }
    }
    out
}

pub fn unpack(n: usize, v: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |(i, j)| v[packed_index(n, i, j)])
}

/// Fixed background metric `u` with its first derivatives cached per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    values: Vec<f64>,
    /// `[node][k][packed ij] = ∂_k u_ij`.
    derivs: Vec<f64>,
}

/// Metric field on a periodic grid, evolved by the DeTurck RG-2 flow.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    grid: Grid,
    g: Vec<f64>,
    background: Background,
    pub t: f64,
    /// Size of the last step taken, zero before the first.
    pub dt: f64,
    pub alpha: f64,
}

/// Per-node geometry collected alongside a right-hand side evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDiagnostics {
    pub min_sectional: f64,
    pub max_sectional: f64,
    pub min_sectional_node: usize,
    pub max_sectional_node: usize,
    pub scalar_min: f64,
    pub scalar_max: f64,
    pub metric_eigen_min: f64,
}

impl GridDiagnostics {
    /// Range of `1 + αK` over all planes at all nodes. For `n ≤ 3` the sectional
    /// extremes are exact, and every `ν` eigenvalue is an average of two such
    /// values, so a positive minimum also certifies the spectrum.
    pub fn one_plus_alpha_k(&self, alpha: f64) -> (f64, f64) {
        let a = 1.0 + alpha * self.min_sectional;
        let b = 1.0 + alpha * self.max_sectional;
        (a.min(b), a.max(b))
    }

    /// Node attaining the minimum of `1 + αK`.
    pub fn critical_node(&self, alpha: f64) -> usize {
        if alpha >= 0.0 {
            self.min_sectional_node
        } else {
            self.max_sectional_node
        }
    }

    fn merge(self, o: Self) -> Self {
        let (min_sectional, min_sectional_node) = if o.min_sectional < self.min_sectional {
            (o.min_sectional, o.min_sectional_node)
        } else {
            (self.min_sectional, self.min_sectional_node)
        };
        let (max_sectional, max_sectional_node) = if o.max_sectional > self.max_sectional {
            (o.max_sectional, o.max_sectional_node)
        } else {
            (self.max_sectional, self.max_sectional_node)
        };
        Self {
            min_sectional,
            max_sectional,
            min_sectional_node,
            max_sectional_node,
            scalar_min: self.scalar_min.min(o.scalar_min),
            scalar_max: self.scalar_max.max(o.scalar_max),
            metric_eigen_min: self.metric_eigen_min.min(o.metric_eigen_min),
        }
    }

    fn empty() -> Self {
        Self {
            min_sectional: f64::INFINITY,
            max_sectional: f64::NEG_INFINITY,
            min_sectional_node: 0,
            max_sectional_node: 0,
            scalar_min: f64::INFINITY,
            scalar_max: f64::NEG_INFINITY,
            metric_eigen_min: f64::INFINITY,
        }
    }
}

impl GridState {
    /// Samples `metric` at every node; the background defaults to the initial metric.
    pub fn from_fn(grid: Grid, alpha: f64, metric: impl Fn(&[f64]) -> Result<Array2<f64>> + Sync) -> Result<Self> {
        let n = grid.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!("grid flows support n ∈ {{2, 3}}, got {n}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
        }
        let g = sample_field(&grid, &metric)?;
        let background = Background::new(&grid, g.clone());
        let state = Self { grid, g, background, t: 0.0, dt: 0.0, alpha };
        state.check_positivity(&state.g)?;
        Ok(state)
    }

    /// Samples a periodic family on the torus `[0, 2π)^n`.
    pub fn from_family(family: &dyn MetricFamily, shape: Vec<usize>, alpha: f64) -> Result<Self> {
        if !family.is_periodic() {
            return Err(Error::InvalidParameter(format!(
                "family `{}` is not periodic on [0, 2π)^n",
                family.name()
            )));
        }
        if shape.len() != family.dim() {
            return Err(Error::DimensionMismatch { expected: family.dim(), found: shape.len() });
        }
        Self::from_fn(Grid::torus(shape)?, alpha, |x| family.metric(x))
    }

    /// Replaces the background metric `u`.
    pub fn with_background(mut self, u: impl Fn(&[f64]) -> Result<Array2<f64>> + Sync) -> Result<Self> {
        let values = sample_field(&self.grid, &u)?;
        self.check_positivity(&values)?;
        self.background = Background::new(&self.grid, values);
        Ok(self)
    }

    /// Rebuilds a state from raw packed node data.
    pub fn from_raw(grid: Grid, g: Vec<f64>, u: Vec<f64>, t: f64, alpha: f64) -> Result<Self> {
        let np = packed_len(grid.dim());
        if g.len() != grid.len() * np || u.len() != g.len() {
            return Err(Error::DimensionMismatch { expected: grid.len() * np, found: g.len().min(u.len()) });
        }
        let background = Background::new(&grid, u);
        Ok(Self { grid, g, background, t, dt: 0.0, alpha })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Packed metric components, node-major.
    pub fn packed(&self) -> &[f64] {
        &self.g
    }

    pub fn background_packed(&self) -> &[f64] {
        &self.background.values
    }

    pub fn metric_at(&self, node: usize) -> Array2<f64> {
        let np = packed_len(self.dim());
        unpack(self.dim(), &self.g[node * np..(node + 1) * np])
    }

    pub fn with_packed(&self, g: Vec<f64>) -> Self {
        Self { g, ..self.clone() }
    }

    fn check_positivity(&self, field: &[f64]) -> Result<()> {
        let n = self.dim();
        let np = packed_len(n);
        for node in 0..self.grid.len() {
            let m = unpack(n, &field[node * np..(node + 1) * np]);
            let (eig, _) = linalg::symmetric_eigen(&m);
            if !(eig[0] > 0.0) {
                return Err(positivity_error(&self.grid, node, eig[0]));
            }
        }
        Ok(())
    }

    /// 2-jet of the metric at `node` from the grid stencils.
    pub fn jet_at(&self, node: usize) -> Result<MetricJet2> {
        jet_from_field(&self.grid, &self.g, node).map_err(|e| match e {
            Error::NotPositiveDefinite { min_eigenvalue } => positivity_error(&self.grid, node, min_eigenvalue),
            Error::SingularMetric { ratio } => positivity_error(&self.grid, node, ratio),
            other => other,
        })
    }

    /// Geometry summary: exact sectional extremes per node, scalar curvature, metric eigenvalues.
    pub fn diagnostics(&self) -> Result<GridDiagnostics> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|node| node_diagnostics(self, node))
            .try_reduce(GridDiagnostics::empty, |a, b| Ok(a.merge(b)))
    }

    /// `dt ≤ σ h² λ_min(g) / (2n · max(1, max|1 + αK|))`.
    pub fn stability_bound(&self, diag: &GridDiagnostics) -> f64 {
        let (lo, hi) = diag.one_plus_alpha_k(self.alpha);
        let amp = lo.abs().max(hi.abs()).max(1.0);
        let h = self.grid.min_spacing();
        STABILITY_FACTOR * h * h * diag.metric_eigen_min / (2.0 * self.dim() as f64 * amp)
    }
}

fn positivity_error(grid: &Grid, node: usize, value: f64) -> Error {
    Error::PositivityLoss(format!("metric at node {:?} (x = {:?}) has eigenvalue {value:e}", grid.multi_index(node), grid.coords(node)))
}

fn sample_field(grid: &Grid, f: &(impl Fn(&[f64]) -> Result<Array2<f64>> + Sync)) -> Result<Vec<f64>> {
    let n = grid.dim();
    let nodes: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let m = f(&grid.coords(k))?;
            if m.dim() != (n, n) {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
            Ok(pack(&m))
        })
        .collect::<Result<_>>()?;
    Ok(nodes.concat())
}

impl Background {
    fn new(grid: &Grid, values: Vec<f64>) -> Self {
        let n = grid.dim();
        let np = packed_len(n);
        let derivs: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|node| {
                let vals = &values;
                (0..n).flat_map(move |k| (0..np).map(move |c| grid.d1(vals, np, c, node, k)))
            })
            .collect();
        Self { values, derivs }
    }
}

fn jet_from_field(grid: &Grid, field: &[f64], node: usize) -> Result<MetricJet2> {
    let n = grid.dim();
    let np = packed_len(n);
    let g = unpack(n, &field[node * np..(node + 1) * np]);
    let mut dg = Array3::zeros((n, n, n));
    let mut d2g = Array4::zeros((n, n, n, n));
    for i in 0..n {
        for j in i..n {
            let c = packed_index(n, i, j);
            for k in 0..n {
                let v = grid.d1(field, np, c, node, k);
                dg[[k, i, j]] = v;
                dg[[k, j, i]] = v;
                for l in k..n {
                    let w = grid.d2(field, np, c, node, k, l);
                    for (a, b) in [(k, l), (l, k)] {
                        d2g[[a, b, i, j]] = w;
                        d2g[[a, b, j, i]] = w;
                    }
                }
            }
        }
    }
    MetricJet2::new(g, dg, d2g)
}

fn node_diagnostics(state: &GridState, node: usize) -> Result<GridDiagnostics> {
    let jet = state.jet_at(node)?;
    let bundle = riemann(&jet);
    let ext = sectional_extremes(&bundle, &jet, &[])?;
    let (lo, _) = jet.eigen_range();
    Ok(GridDiagnostics {
        min_sectional: ext.min,
        max_sectional: ext.max,
        min_sectional_node: node,
        max_sectional_node: node,
        scalar_min: bundle.scalar,
        scalar_max: bundle.scalar,
        metric_eigen_min: lo,
    })
}

/// DeTurck field `W^i = −g^{ij} ũ_jk g^{kl} g^{pq}(∇_p u_ql − ½ ∇_l u_pq)` at `node`,
/// where `ũ_jk = g_ja u^{ab} g_bk` and `∇` is the Levi-Civita connection of `g`.
pub fn deturck_vector_field(state: &GridState, node: usize) -> Result<Vec<f64>> {
    let jet = state.jet_at(node)?;
    let gamma = christoffel(&jet).gamma;
    Ok(deturck_from_parts(state, node, &jet, &gamma))
}

fn deturck_from_parts(state: &GridState, node: usize, jet: &MetricJet2, gamma: &Array3<f64>) -> Vec<f64> {
    let n = state.dim();
    let np = packed_len(n);
    let u = unpack(n, &state.background.values[node * np..(node + 1) * np]);
    let du = |k: usize, i: usize, j: usize| state.background.derivs[(node * n + k) * np + packed_index(n, i, j)];
    let uinv = linalg::inverse(&u).expect("background metric is positive definite");
    let g = jet.g();
    let ginv = jet.inverse();
    let utilde = g.dot(&uinv).dot(g);
    // ∇_p u_ql
    let nabla_u = Array3::from_shape_fn((n, n, n), |(p, q, l)| {
        let mut v = du(p, q, l);
        for m in 0..n {
            v -= gamma[[m, p, q]] * u[[m, l]] + gamma[[m, p, l]] * u[[q, m]];
        }
        v
    });
    // T_l = g^{pq}(∇_p u_ql − ½ ∇_l u_pq)
    let tl: Vec<f64> = (0..n)
        .map(|l| {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    s += ginv[[p, q]] * (nabla_u[[p, q, l]] - 0.5 * nabla_u[[l, p, q]]);
                }
            }
            s
        })
        .collect();
    let m = ginv.dot(&utilde).dot(ginv);
    (0..n).map(|i| -(0..n).map(|l| m[[i, l]] * tl[l]).sum::<f64>()).collect()
}

/// Right-hand side `−2Rc + L_W g − (α/2)Rm²` at every node, packed node-major.
pub fn grid_rhs(state: &GridState) -> Result<Vec<f64>> {
    let n = state.dim();
    let np = packed_len(n);
    let grid = &state.grid;
    let alpha = state.alpha;

    struct NodeTerms {
        gamma: Array3<f64>,
        base: Vec<f64>,
        w_lower: Vec<f64>,
    }
    let terms: Vec<NodeTerms> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let jet = state.jet_at(node)?;
            let bundle = riemann(&jet);
            let w = deturck_from_parts(state, node, &jet, &bundle.gamma);
            let g = jet.g();
            let w_lower = (0..n).map(|j| (0..n).map(|k| g[[j, k]] * w[k]).sum::<f64>()).collect();
            let base = -2.0 * &bundle.ricci - 0.5 * alpha * &bundle.rm_sq;
            Ok(NodeTerms { gamma: bundle.gamma, base: pack(&base), w_lower })
        })
        .collect::<Result<_>>()?;

    let w_field: Vec<f64> = terms.iter().flat_map(|t| t.w_lower.iter().copied()).collect();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|node| {
            let t = &terms[node];
            let dw = Array2::from_shape_fn((n, n), |(i, j)| grid.d1(&w_field, n, j, node, i));
            let w_field = &w_field;
            (0..n).flat_map(move |i| (i..n).map(move |j| (i, j))).map(move |(i, j)| {
                // ∇_i W_j + ∇_j W_i
                let mut lie = dw[[i, j]] + dw[[j, i]];
                for k in 0..n {
                    lie -= 2.0 * t.gamma[[k, i, j]] * w_field[node * n + k];
                }
                t.base[packed_index(n, i, j)] + lie
            })
        })
        .collect();
    debug_assert_eq!(out.len(), grid.len() * np);
    Ok(out)
}

/// [`grid_rhs`] unpacked into one symmetric matrix per node.
pub fn grid_rhs_matrices(state: &GridState) -> Result<Vec<Array2<f64>>> {
    let n = state.dim();
    let np = packed_len(n);
    Ok(grid_rhs(state)?.chunks(np).map(|c| unpack(n, c)).collect())
}

/// One classical RK4 step after checking `dt` against [`GridState::stability_bound`].
pub fn step_grid(state: &GridState, dt: f64) -> Result<GridState> {
    let diag = state.diagnostics()?;
    step_grid_with(state, dt, &diag)
}

pub(crate) fn step_grid_with(state: &GridState, dt: f64, diag: &GridDiagnostics) -> Result<GridState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step {dt}")));
    }
    let bound = state.stability_bound(diag);
    if dt > bound {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let g = rk4_step(&state.g, state.t, dt, |_, y| grid_rhs(&state.with_packed(y.to_vec())))?;
    let next = GridState { g, t: state.t + dt, dt, ..state.clone() };
    next.check_positivity(&next.g)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::family_from_name;

    fn perturbed_flat(m: usize, eps: f64, alpha: f64) -> GridState {
        GridState::from_fn(Grid::torus(vec![m, m]).unwrap(), alpha, |x| {
            let c = eps * x[0].cos();
            Ok(ndarray::array![[1.0 + c, 0.5 * c], [0.5 * c, 1.0 - 0.3 * c]])
        })
        .unwrap()
    }

    #[test]
    fn packing_round_trips() {
        let m = ndarray::array![[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]];
        assert_eq!(pack(&m), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(unpack(3, &pack(&m)), m);
        assert_eq!(packed_index(3, 2, 1), 4);
    }

    #[test]
    fn flat_torus_is_a_fixed_point() {
        let s = GridState::from_fn(Grid::torus(vec![8, 8]).unwrap(), 1.0, |_| Ok(Array2::eye(2))).unwrap();
        assert!(grid_rhs(&s).unwrap().iter().all(|v| *v == 0.0));
        let next = step_grid(&s, 1e-3).unwrap();
        assert_eq!(next.packed(), s.packed());
    }

    #[test]
    fn deturck_field_vanishes_for_own_background() {
        let s = perturbed_flat(16, 0.2, 0.5);
        for node in [0, 17, 100] {
            assert!(deturck_vector_field(&s, node).unwrap().iter().all(|w| w.abs() < 1e-12));
        }
        let flat = GridState::from_fn(Grid::torus(vec![8, 8]).unwrap(), 0.0, |_| Ok(Array2::eye(2)))
            .unwrap()
            .with_background(|_| Ok(ndarray::array![[2.0, 0.3], [0.3, 1.0]]))
            .unwrap();
        assert!(deturck_vector_field(&flat, 5).unwrap().iter().all(|w| w.abs() < 1e-14));
    }

    #[test]
    fn initial_rhs_is_the_rg2_operator() {
        let fam = family_from_name("conformal", 2, &[0.3, 0.2]).unwrap();
        let s = GridState::from_family(fam.as_ref(), vec![48, 48], 0.7).unwrap();
        let rhs = grid_rhs_matrices(&s).unwrap();
        let mut worst = 0.0_f64;
        for node in (0..s.grid().len()).step_by(37) {
            let jet = fam.jet(&s.grid().coords(node)).unwrap();
            let b = riemann(&jet);
            let want = -2.0 * &b.ricci - 0.35 * &b.rm_sq;
            worst = worst.max(linalg::max_abs((&rhs[node] - &want).iter()));
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn oversized_step_is_refused() {
        let s = perturbed_flat(16, 0.1, 0.0);
        let d = s.diagnostics().unwrap();
        let bound = s.stability_bound(&d);
        assert!(matches!(step_grid(&s, 2.0 * bound), Err(Error::StepTooLarge { .. })));
        assert!(step_grid(&s, 0.5 * bound).is_ok());
    }

    #[test]
    fn non_periodic_family_is_refused() {
        let fam = family_from_name("sphere", 2, &[1.0]).unwrap();
        assert!(GridState::from_family(fam.as_ref(), vec![8, 8], 0.0).is_err());
        let fam = family_from_name("perturbed", 4, &[]).unwrap();
        assert!(GridState::from_family(fam.as_ref(), vec![8; 4], 0.0).is_err());
    }
}
