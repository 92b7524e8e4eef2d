#![allow(dead_code)]

use ndarray::{Array, Array2, Dimension};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rg2lab_core::geometry::{family_from_name, MetricFamily};
use rg2lab_core::MetricJet2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs<D: Dimension>(a: &Array<f64, D>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_diff<D: Dimension>(a: &Array<f64, D>, b: &Array<f64, D>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `max|a − b| / max|b|`, or the absolute difference when `b` vanishes.
pub fn rel_diff<D: Dimension>(a: &Array<f64, D>, b: &Array<f64, D>) -> f64 {
    let scale = max_abs(b);
    let d = max_diff(a, b);
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

pub fn family(name: &str, dim: usize, params: &[f64]) -> Box<dyn MetricFamily> {
    family_from_name(name, dim, params).expect("built-in family")
}

/// Every built-in family in dimension `n` with its default parameters.
pub fn all_families(n: usize) -> Vec<Box<dyn MetricFamily>> {
    vec![
        family("flat", n, &[]),
        family("sphere", n, &[1.3]),
        family("hyperbolic", n, &[0.8]),
        family("product", n, &[]),
        family("warped", n, &[0.3]),
        family("conformal", n, &[0.3, -0.2]),
        family("perturbed", n, &[0.15, 7.0]),
    ]
}

pub fn sample_jets(f: &dyn MetricFamily, count: usize, seed: u64) -> Vec<(Vec<f64>, MetricJet2)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let x = f.sample_point(&mut r);
            let jet = f.jet(&x).expect("jet");
            (x, jet)
        })
        .collect()
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-2 {
            return v;
        }
    }
}

pub fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let a = Array2::from_shape_fn((n, n), |_| r.random_range(-1.0..1.0));
    0.5 * (&a + &a.t())
}
