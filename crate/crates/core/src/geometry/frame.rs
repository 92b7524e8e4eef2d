use ndarray::{Array2, Array4, ArrayD, Ix2, Ix4};

use super::jet::MetricJet2;
use crate::error::{Error, Result};

/// A g-orthonormal frame. Row `a` of `vectors` holds the chart components of `e_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: Array2<f64>,
}

impl Frame {
    pub fn from_rows(vectors: Array2<f64>) -> Self {
        Self { vectors }
    }

    /// Frame whose first vector is the g-dual of the covector `xi`, so that
    /// `ξ(e_1) = |ξ|_g` and `ξ(e_a) = 0` for `a ≥ 2`.
    pub fn from_covector(jet: &MetricJet2, xi: &[f64]) -> Result<Self> {
        if xi.len() != jet.dim() {
            return Err(Error::DimensionMismatch { expected: jet.dim(), found: xi.len() });
        }
        orthonormal_frame(jet, &jet.raise(xi))
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn vector(&self, a: usize) -> Vec<f64> {
        self.vectors.row(a).to_vec()
    }

    /// Maximum deviation of `g(e_a, e_b)` from `δ_ab`.
    pub fn orthonormality_defect(&self, jet: &MetricJet2) -> f64 {
        let gram = frame_transform_rank2(jet.g(), self);
        let n = self.dim();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[[a, b]] - want).abs());
            }
        }
        worst
    }

    /// Replaces `e_2..e_n` by `Σ_b Q[b, a] e_{b+2}`; `Q` must be orthogonal.
    pub fn rotate_tail(&self, q: &Array2<f64>) -> Self {
        let n = self.dim();
        let mut v = self.vectors.clone();
        for a in 0..n - 1 {
            for c in 0..n {
                v[[a + 1, c]] = (0..n - 1).map(|b| q[[b, a]] * self.vectors[[b + 1, c]]).sum::<f64>();
            }
        }
        Self { vectors: v }
    }

    /// Chart components of the frame vector combination `Σ_a w_a e_a`.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|c| (0..n).map(|a| weights[a] * self.vectors[[a, c]]).sum::<f64>()).collect()
    }
}

/// Gram–Schmidt in the inner product `g`, seeded with `first_direction` and
/// completed from the coordinate basis.
pub fn orthonormal_frame(jet: &MetricJet2, first_direction: &[f64]) -> Result<Frame> {
    let n = jet.dim();
    if first_direction.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: first_direction.len() });
    }
    let norm0 = jet.inner(first_direction, first_direction).sqrt();
    let scale = jet.eigen_range().1.sqrt() * first_direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm0 > 1e-14 * scale.max(f64::MIN_POSITIVE)) || norm0 == 0.0 {
        return Err(Error::ZeroVector);
    }

    let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(n);
    let candidates = std::iter::once(first_direction.to_vec()).chain((0..n).map(|c| {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        e
    }));
    for cand in candidates {
        if accepted.len() == n {
            break;
        }
        let start = jet.inner(&cand, &cand).sqrt();
        let mut w = cand;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for e in &accepted {
                let p = jet.inner(&w, e);
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= p * ei;
                }
            }
        }
        let norm = jet.inner(&w, &w).sqrt();
        if norm > 1e-8 * start {
            accepted.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    let vectors = Array2::from_shape_fn((n, n), |(a, c)| accepted[a][c]);
    Ok(Frame { vectors })
}

/// `T_ab = e_a^i e_b^j T_ij`.
pub fn frame_transform_rank2(t: &Array2<f64>, frame: &Frame) -> Array2<f64> {
    let f = frame.vectors();
    f.dot(t).dot(&f.t())
}

/// `T_abcd = e_a^i e_b^j e_c^k e_d^l T_ijkl`, one index at a time.
pub fn frame_transform_rank4(t: &Array4<f64>, frame: &Frame) -> Array4<f64> {
    let f = frame.vectors();
    let n = f.nrows();
    let s1 = Array4::from_shape_fn((n, n, n, n), |(i, j, k, d)| {
        (0..n).map(|l| f[[d, l]] * t[[i, j, k, l]]).sum::<f64>()
    });
    let s2 = Array4::from_shape_fn((n, n, n, n), |(i, j, c, d)| {
        (0..n).map(|k| f[[c, k]] * s1[[i, j, k, d]]).sum::<f64>()
    });
    let s3 = Array4::from_shape_fn((n, n, n, n), |(i, b, c, d)| {
        (0..n).map(|j| f[[b, j]] * s2[[i, j, c, d]]).sum::<f64>()
    });
    Array4::from_shape_fn((n, n, n, n), |(a, b, c, d)| {
        (0..n).map(|i| f[[a, i]] * s3[[i, b, c, d]]).sum::<f64>()
    })
}

/// Frame components of a covariant tensor of rank 2 or 4.
pub fn frame_transform(t: &ArrayD<f64>, frame: &Frame) -> Result<ArrayD<f64>> {
    let n = frame.dim();
    if t.shape().iter().any(|&s| s != n) {
        return Err(Error::ValenceMismatch(format!(
            "tensor shape {:?} does not match frame dimension {n}",
            t.shape()
        )));
    }
    match t.ndim() {
        2 => {
            let t2 = t.view().into_dimensionality::<Ix2>().expect("rank checked").to_owned();
            Ok(frame_transform_rank2(&t2, frame).into_dyn())
        }
        4 => {
            let t4 = t.view().into_dimensionality::<Ix4>().expect("rank checked").to_owned();
            Ok(frame_transform_rank4(&t4, frame).into_dyn())
        }
        r => Err(Error::ValenceMismatch(format!("covariant rank {r} is not 2 or 4"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, IxDyn};

    #[test]
    fn identity_metric_gives_standard_basis() {
        let jet = MetricJet2::flat(3).unwrap();
        let f = orthonormal_frame(&jet, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.vectors(), &Array2::<f64>::eye(3));
    }

    #[test]
    fn normalization_is_forced() {
        let jet = MetricJet2::constant(array![[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let f = orthonormal_frame(&jet, &[1.0, 0.0]).unwrap();
        assert!((f.vectors()[[0, 0]] - 0.5).abs() < 1e-15 && f.vectors()[[0, 1]] == 0.0);
    }

    #[test]
    fn zero_direction_is_an_error() {
        let jet = MetricJet2::flat(2).unwrap();
        assert!(matches!(orthonormal_frame(&jet, &[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn metric_in_its_own_frame_is_identity() {
        let jet = MetricJet2::constant(array![[3.0, 0.5, 0.1], [0.5, 2.0, 0.2], [0.1, 0.2, 1.0]]).unwrap();
        let f = orthonormal_frame(&jet, &[0.3, 1.0, -0.2]).unwrap();
        assert!(f.orthonormality_defect(&jet) < 1e-14);
        let t = frame_transform(&jet.g().clone().into_dyn(), &f).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((t[[a, b]] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_frame_leaves_tensor_unchanged() {
        let jet = MetricJet2::flat(2).unwrap();
        let f = orthonormal_frame(&jet, &[1.0, 0.0]).unwrap();
        let t = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(frame_transform_rank2(&t, &f), t);
    }

    #[test]
    fn rank_three_is_a_valence_mismatch() {
        let jet = MetricJet2::flat(2).unwrap();
        let f = orthonormal_frame(&jet, &[1.0, 0.0]).unwrap();
        let t = ArrayD::<f64>::zeros(IxDyn(&[2, 2, 2]));
        assert!(matches!(frame_transform(&t, &f), Err(Error::ValenceMismatch(_))));
        let wrong = ArrayD::<f64>::zeros(IxDyn(&[3, 3]));
        assert!(matches!(frame_transform(&wrong, &f), Err(Error::ValenceMismatch(_))));
    }
}
