use ndarray::Array2;

use super::curvature::CurvatureBundle;
use super::frame::{frame_transform_rank4, orthonormal_frame};
use super::jet::MetricJet2;
use crate::error::{Error, Result};
use crate::linalg;

/// A 2-plane spanned by two chart vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Plane {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }
}

/// Minimum and maximum sectional curvature at a point, with witnessing planes.
#[derive(Debug, Clone)]
pub struct SectionalExtremes {
    pub min: f64,
    pub min_plane: Plane,
    pub max: f64,
    pub max_plane: Plane,
}

/// Extremal sectional curvatures.
///
/// Exact for `n ≤ 3` (in three dimensions every bivector is decomposable, so the
/// extremes are the extreme eigenvalues of the curvature operator). For `n ≥ 4`
/// it runs an alternating search from every vector of an orthonormal frame plus
/// `extra_seeds`: for fixed unit `x`, `y ↦ K(x, y)` on `x^⊥` is a quadratic form
/// whose extreme eigenvector is taken as the next `x`. Each sweep is monotone.
pub fn sectional_extremes(
    bundle: &CurvatureBundle,
    jet: &MetricJet2,
    extra_seeds: &[Vec<f64>],
) -> Result<SectionalExtremes> {
    let n = jet.dim();
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let frame = orthonormal_frame(jet, &e1)?;
    let r = frame_transform_rank4(&bundle.riem_low, &frame);
    let to_chart = |w: &[f64]| frame.combine(w);

    if n == 2 {
        let k = r[[0, 1, 0, 1]];
        let p = Plane::new(frame.vector(0), frame.vector(1))?;
        return Ok(SectionalExtremes { min: k, min_plane: p.clone(), max: k, max_plane: p });
    }
    if n == 3 {
        // bivector basis e2∧e3, e3∧e1, e1∧e2
        let pairs = [(1, 2), (2, 0), (0, 1)];
        let q = Array2::from_shape_fn((3, 3), |(a, b)| {
            let (i, j) = pairs[a];
            let (k, l) = pairs[b];
            r[[i, j, k, l]]
        });
        let (vals, vecs) = linalg::symmetric_eigen(&q);
        let plane_of = |col: usize| -> Result<Plane> {
            // plane orthogonal to the Hodge-dual vector
            let normal: Vec<f64> = (0..3).map(|a| vecs[[a, col]]).collect();
            let (u, v) = complement_pair(&normal);
            Plane::new(to_chart(&u), to_chart(&v))
        };
        return Ok(SectionalExtremes {
            min: vals[0],
            min_plane: plane_of(0)?,
            max: vals[2],
            max_plane: plane_of(2)?,
        });
    }

    // frame coordinates of the seeds
    let mut seeds: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let mut s = vec![0.0; n];
            s[a] = 1.0;
            s
        })
        .collect();
    for s in extra_seeds {
        if s.len() == n {
            let w: Vec<f64> = (0..n).map(|a| jet.inner(&frame.vector(a), s)).collect();
            if w.iter().any(|x| *x != 0.0) {
                seeds.push(w);
            }
        }
    }

    let mut best_min = (f64::INFINITY, vec![], vec![]);
    let mut best_max = (f64::NEG_INFINITY, vec![], vec![]);
    for seed in &seeds {
        for minimize in [true, false] {
            let (k, x, y) = alternating_search(&r, seed, minimize);
            if minimize && k < best_min.0 {
                best_min = (k, x, y);
            } else if !minimize && k > best_max.0 {
                best_max = (k, x, y);
            }
        }
    }
    Ok(SectionalExtremes {
        min: best_min.0,
        min_plane: Plane::new(to_chart(&best_min.1), to_chart(&best_min.2))?,
        max: best_max.0,
        max_plane: Plane::new(to_chart(&best_max.1), to_chart(&best_max.2))?,
    })
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Orthonormal basis of the complement of a unit vector, Euclidean in frame coordinates.
fn complement_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut basis: Vec<Vec<f64>> = vec![x.to_vec()];
    for c in 0..n {
        let mut w = vec![0.0; n];
        w[c] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = w.iter().zip(b).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= p * bi);
            }
        }
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            w.iter_mut().for_each(|a| *a /= norm);
            basis.push(w);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn complement_pair(normal: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut nn = normal.to_vec();
    normalize(&mut nn);
    let b = complement_basis(&nn);
    (b[0].clone(), b[1].clone())
}

fn alternating_search(r: &ndarray::Array4<f64>, seed: &[f64], minimize: bool) -> (f64, Vec<f64>, Vec<f64>) {
    let n = seed.len();
    let mut x = seed.to_vec();
    normalize(&mut x);
    let mut last = if minimize { f64::INFINITY } else { f64::NEG_INFINITY };
    let mut y = vec![0.0; n];
    for _ in 0..200 {
        let basis = complement_basis(&x);
        let m = basis.len();
        // K(x, y) = R(x, y, x, y) restricted to x^⊥
        let q = Array2::from_shape_fn((m, m), |(a, b)| {
            let (ya, yb) = (&basis[a], &basis[b]);
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            s += r[[i, j, k, l]] * x[i] * ya[j] * x[k] * yb[l];
                        }
                    }
                }
            }
            s
        });
        let q = (&q + &q.t()) * 0.5;
        let (vals, vecs) = linalg::symmetric_eigen(&q);
        let col = if minimize { 0 } else { m - 1 };
        let k = vals[col];
        y = (0..n).map(|i| (0..m).map(|a| vecs[[a, col]] * basis[a][i]).sum()).collect();
        let improved = if minimize { k < last - 1e-15 * (1.0 + k.abs()) } else { k > last + 1e-15 * (1.0 + k.abs()) };
        last = k;
        if !improved {
            break;
        }
        std::mem::swap(&mut x, &mut y);
    }
    (last, x, y)
}

impl SectionalExtremes {
    pub fn one_plus_alpha_range(&self, alpha: f64) -> (f64, f64) {
        let a = 1.0 + alpha * self.min;
        let b = 1.0 + alpha * self.max;
        (a.min(b), a.max(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{family_from_name, riemann, sectional_curvature};

    #[test]
    fn product_of_spheres_ranges_from_zero_to_one() {
        let fam = family_from_name("product", 4, &[2.0, 1.0, 1.0]).unwrap();
        let jet = fam.jet(&[0.2, -0.1, 0.3, 0.4]).unwrap();
        let b = riemann(&jet);
        let ext = sectional_extremes(&b, &jet, &[]).unwrap();
        assert!(ext.min.abs() < 1e-12, "min {}", ext.min);
        assert!((ext.max - 1.0).abs() < 1e-12, "max {}", ext.max);
        let k = sectional_curvature(&b, &jet, &ext.max_plane).unwrap();
        assert!((k - ext.max).abs() < 1e-12);
    }

    #[test]
    fn three_dimensional_extremes_bound_samples() {
        let fam = family_from_name("perturbed", 3, &[0.2, 7.0]).unwrap();
        let jet = fam.jet(&[0.4, 1.1, -0.7]).unwrap();
        let b = riemann(&jet);
        let ext = sectional_extremes(&b, &jet, &[]).unwrap();
        for (u, v) in [([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), ([1.0, 2.0, 0.5], [-0.3, 0.2, 1.0])] {
            let k = sectional_curvature(&b, &jet, &Plane::new(u.to_vec(), v.to_vec()).unwrap()).unwrap();
            assert!(k >= ext.min - 1e-12 && k <= ext.max + 1e-12);
        }
        let kmin = sectional_curvature(&b, &jet, &ext.min_plane).unwrap();
        assert!((kmin - ext.min).abs() < 1e-10);
    }
}
