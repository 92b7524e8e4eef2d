//! Thin bridge to `nalgebra` for the handful of dense decompositions the
//! tensor code needs. All matrices here are tiny (n ≤ 15).

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;

pub(crate) fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn inverse(a: &Array2<f64>) -> Option<Array2<f64>> {
    to_dmatrix(a).try_inverse().map(|m| from_dmatrix(&m))
}

pub fn determinant(a: &Array2<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    to_dmatrix(a).determinant()
}

/// Eigen-decomposition of a symmetric matrix. Eigenvalues ascend; eigenvectors
/// are the matching columns of the returned matrix.
pub fn symmetric_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), Array2::zeros((0, 0)));
    }
    let sym = to_dmatrix(a);
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a general real matrix, sorted by real part.
///
/// The Schur iteration is bounded. Nearly scalar matrices with roundoff-level
/// off-diagonal noise may not deflate at machine epsilon, so the deflation
/// threshold is relaxed step by step; a residual failure returns `None`.
pub fn try_eigenvalues(a: &Array2<f64>) -> Option<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Some(Vec::new());
    }
    let m = to_dmatrix(a);
    let schur = [f64::EPSILON, 1e-14, 1e-12, 1e-10]
        .into_iter()
        .find_map(|eps| nalgebra::Schur::try_new(m.clone(), eps, SCHUR_MAX_ITERATIONS))?;
    let mut ev: Vec<Complex64> =
        schur.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Some(ev)
}

const SCHUR_MAX_ITERATIONS: usize = 2_000;

/// [`try_eigenvalues`], panicking if the Schur iteration does not converge.
pub fn eigenvalues(a: &Array2<f64>) -> Vec<Complex64> {
    try_eigenvalues(a).expect("Schur iteration did not converge")
}

pub fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
