//! Principal (second-order) parts of the variations of `Rm` and `Rm²`.
//!
//! An expression `Σ C[p,q,a,b] ∇_p∇_q h_ab` is stored as a coefficient row per
//! output component over the ordered slots `(p, q, a, b)`. Slots are kept ordered,
//! so commuting pairs such as `∇_i∇_j h − ∇_j∇_i h` remain visible and cancel only
//! once contracted against a symmetric second derivative. Lower-order terms are
//! never represented.

use ndarray::{Array2, Array4, ArrayD, IxDyn};

use crate::geometry::{CurvatureBundle, MetricJet2};

/// Marker for the part of a linearization that is intentionally dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerOrderTerms {
    Omitted,
}

/// Coefficients of a linear expression in `∇_p∇_q h_ab`.
#[derive(Debug, Clone)]
pub struct SecondDerivativeSlot {
    dim: usize,
    output_shape: Vec<usize>,
    /// `(output component, p·n³ + q·n² + a·n + b)`
    coeffs: Array2<f64>,
    pub lower_order: LowerOrderTerms,
}

impl SecondDerivativeSlot {
    fn zeros(dim: usize, output_shape: Vec<usize>) -> Self {
        let outputs = output_shape.iter().product();
        Self {
            dim,
            output_shape,
            coeffs: Array2::zeros((outputs, dim.pow(4))),
            lower_order: LowerOrderTerms::Omitted,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    fn slot(&self, p: usize, q: usize, a: usize, b: usize) -> usize {
        let n = self.dim;
        ((p * n + q) * n + a) * n + b
    }

    /// Row-major flat index of an output component.
    pub fn output_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.output_shape).fold(0, |acc, (i, s)| acc * s + i)
    }

    pub fn coefficient(&self, out: &[usize], p: usize, q: usize, a: usize, b: usize) -> f64 {
        self.coeffs[[self.output_index(out), self.slot(p, q, a, b)]]
    }

    fn add(&mut self, out: usize, p: usize, q: usize, a: usize, b: usize, c: f64) {
        let s = self.slot(p, q, a, b);
        self.coeffs[[out, s]] += c;
    }

    /// Evaluates the expression for given second derivatives
    /// `d2h[[p, q, a, b]] = ∇_p∇_q h_ab`.
    pub fn contract(&self, d2h: &Array4<f64>) -> ArrayD<f64> {
        let flat = d2h.as_standard_layout();
        let v = ndarray::ArrayView1::from(flat.as_slice().expect("standard layout"));
        let out = self.coeffs.dot(&v);
        out.into_shape_with_order(IxDyn(&self.output_shape)).expect("shape matches")
    }

    /// Replaces `∇_p∇_q` by `ξ_p ξ_q`.
    pub fn symbol(&self, xi: &[f64], h: &Array2<f64>) -> ArrayD<f64> {
        let n = self.dim;
        let d2h = Array4::from_shape_fn((n, n, n, n), |(p, q, a, b)| xi[p] * xi[q] * h[[a, b]]);
        self.contract(&d2h)
    }

    /// Largest violation of antisymmetry between two output axes, slot by slot.
    pub fn antisymmetry_defect(&self, axis_a: usize, axis_b: usize) -> f64 {
        let n = self.dim;
        let rank = self.output_shape.len();
        let mut worst = 0.0_f64;
        let total: usize = self.output_shape.iter().product();
        for flat in 0..total {
            let mut idx = vec![0; rank];
            let mut rem = flat;
            for d in (0..rank).rev() {
                idx[d] = rem % self.output_shape[d];
                rem /= self.output_shape[d];
            }
            idx.swap(axis_a, axis_b);
            let partner = self.output_index(&idx);
            for s in 0..n.pow(4) {
                worst = worst.max((self.coeffs[[flat, s]] + self.coeffs[[partner, s]]).abs());
            }
        }
        worst
    }
}

/// Principal part of `[D Rm_g(h)]^l_ijk`:
///
/// ```text
/// ½ g^{lp}(∇_i∇_j h_kp + ∇_i∇_k h_jp − ∇_i∇_p h_jk − ∇_j∇_i h_kp − ∇_j∇_k h_ip + ∇_j∇_p h_ik)
/// ```
///
/// Output layout matches `riem_up[[l, i, j, k]]`.
pub fn d_riemann_principal(jet: &MetricJet2) -> SecondDerivativeSlot {
    let n = jet.dim();
    let ginv = jet.inverse();
    let mut slot = SecondDerivativeSlot::zeros(n, vec![n; 4]);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let out = ((l * n + i) * n + j) * n + k;
                    for p in 0..n {
                        let c = 0.5 * ginv[[l, p]];
                        if c == 0.0 {
                            continue;
                        }
                        slot.add(out, i, j, k, p, c);
                        slot.add(out, i, k, j, p, c);
                        slot.add(out, i, p, j, k, -c);
                        slot.add(out, j, i, k, p, -c);
                        slot.add(out, j, k, i, p, -c);
                        slot.add(out, j, p, i, k, c);
                    }
                }
            }
        }
    }
    slot
}

/// Principal part of `[D Rm²_g(h)]_ij`.
///
/// In the sign convention of this crate (`R_1212 = K`) it reads
///
/// ```text
/// R_ikul (∇_j∇^l h^{ku} − ∇^k∇^l h_j^u) + R_jkul (∇_i∇^l h^{ku} − ∇^k∇^l h_i^u)
/// ```
///
/// Curvature commutators produced by reordering derivatives carry no second
/// derivatives of `h` and are absent.
pub fn d_rmsq_principal(jet: &MetricJet2, bundle: &CurvatureBundle) -> SecondDerivativeSlot {
    let n = jet.dim();
    let ginv = jet.inverse();
    // T[i, b, a, c] = R_{i k u l} g^{kb} g^{la} g^{uc}  (k → b, l → a, u → c)
    let r = &bundle.riem_low;
    let t = Array4::from_shape_fn((n, n, n, n), |(i, b, a, c)| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                for u in 0..n {
                    s += r[[i, k, u, l]] * ginv[[k, b]] * ginv[[l, a]] * ginv[[u, c]];
                }
            }
        }
        s
    });

    // one half: P_ij = R_ikul ∇_j∇^l h^{ku} − R_ikul ∇^k∇^l h_j^u
    let mut half = SecondDerivativeSlot::zeros(n, vec![n, n]);
    for i in 0..n {
        for j in 0..n {
            let out = i * n + j;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        // ∇_j∇_a h_bc with k → b, l → a, u → c
                        half.add(out, j, a, b, c, t[[i, b, a, c]]);
                        // ∇_b∇_a h_jc with k → b, l → a, u → c
                        half.add(out, b, a, j, c, -t[[i, b, a, c]]);
                    }
                }
            }
        }
    }
    let mut full = half.clone();
    for i in 0..n {
        for j in 0..n {
            let (out, swapped) = (i * n + j, j * n + i);
            for s in 0..n.pow(4) {
                full.coeffs[[out, s]] += half.coeffs[[swapped, s]];
            }
        }
    }
    full
}

/// `[D g⁻¹(h)]^{ij} = −g^{ip} g^{jq} h_pq`.
pub fn d_inverse_metric(h: &Array2<f64>, jet: &MetricJet2) -> Array2<f64> {
    let ginv = jet.inverse();
    -ginv.dot(h).dot(ginv)
}

/// A symmetric variation direction `h_ij` with its index-raised forms.
#[derive(Debug, Clone)]
pub struct SymmetricPerturbation {
    pub h: Array2<f64>,
    /// `h^i_j = g^{ik} h_kj`
    pub mixed: Array2<f64>,
    /// `h^{ij}`
    pub upper: Array2<f64>,
}

impl SymmetricPerturbation {
    pub fn new(h: Array2<f64>, jet: &MetricJet2) -> crate::Result<Self> {
        let n = jet.dim();
        if h.dim() != (n, n) {
            return Err(crate::Error::DimensionMismatch { expected: n, found: h.nrows() });
        }
        let scale = h.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (h[[i, j]] - h[[j, i]]).abs() > 1e-12 * scale {
                    return Err(crate::Error::InvalidParameter("perturbation must be symmetric".into()));
                }
            }
        }
        let ginv = jet.inverse();
        let mixed = ginv.dot(&h);
        let upper = mixed.dot(ginv);
        Ok(Self { h, mixed, upper })
    }
}
