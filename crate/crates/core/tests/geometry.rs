mod common;

use std::f64::consts::FRAC_PI_4;

use common::*;
use ndarray::{array, Array2, Array3, Array4};
use proptest::prelude::*;
use rg2lab_core::geometry::{
    christoffel, frame_transform_rank2, frame_transform_rank4, orthonormal_frame, riemann, sectional_curvature,
};
use rg2lab_core::oracle::{fd_metric_jet, FD_STEP, naive_christoffel, naive_riemann_lower, naive_rm_squared, riemann_identity_residuals};
use rg2lab_core::{MetricJet2, Plane};

fn polar_sphere_jet(theta: f64) -> MetricJet2 {
    let (s, c) = theta.sin_cos();
    let g = array![[1.0, 0.0], [0.0, s * s]];
    let mut dg = Array3::zeros((2, 2, 2));
    dg[[0, 1, 1]] = 2.0 * s * c;
    let mut d2g = Array4::zeros((2, 2, 2, 2));
    d2g[[0, 0, 1, 1]] = 2.0 * (2.0 * theta).cos();
    MetricJet2::new(g, dg, d2g).unwrap()
}

#[test]
fn polar_sphere_christoffel_symbols() {
    let jet = polar_sphere_jet(FRAC_PI_4);
    let ch = christoffel(&jet);
    assert!((ch.gamma[[0, 1, 1]] + 0.5).abs() < 1e-15);
    assert!((ch.gamma[[1, 0, 1]] - 1.0).abs() < 1e-15);
    assert!((ch.gamma[[1, 1, 0]] - 1.0).abs() < 1e-15);
    let bundle = riemann(&jet);
    let k = sectional_curvature(&bundle, &jet, &Plane::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap()).unwrap();
    assert!((k - 1.0).abs() < 1e-14);
}

#[test]
fn christoffel_matches_finite_differences() {
    for n in [2, 3, 4] {
        for f in all_families(n) {
            for (x, jet) in sample_jets(f.as_ref(), 4, 11) {
                let fd = fd_metric_jet(f.as_ref(), &x, 1e-4).unwrap();
                let ch = christoffel(&jet);
                let oracle = naive_christoffel(&fd).unwrap();
                let err = if max_abs(&ch.gamma) == 0.0 { max_abs(&oracle) } else { rel_diff(&ch.gamma, &oracle) };
                assert!(err <= 1e-8, "{} n={n} at {x:?}: {err:e}", f.name());
            }
        }
    }
}

#[test]
fn riemann_matches_finite_differences() {
    for n in [2, 3, 4] {
        for f in all_families(n) {
            for (x, jet) in sample_jets(f.as_ref(), 3, 12) {
                let fd = fd_metric_jet(f.as_ref(), &x, FD_STEP).unwrap();
                let r = riemann(&jet).riem_low;
                let oracle = naive_riemann_lower(&fd).unwrap();
                let err = if max_abs(&r) == 0.0 { max_abs(&oracle) } else { rel_diff(&r, &oracle) };
                assert!(err <= 1e-7, "{} n={n} at {x:?}: {err:e}", f.name());
            }
        }
    }
}

#[test]
fn sphere_is_constant_curvature_in_any_frame() {
    let mut r = rng(3);
    for n in 2..=4 {
        for radius in [0.5, 1.0, 2.0] {
            let f = family("sphere", n, &[radius]);
            let k = 1.0 / (radius * radius);
            for (_, jet) in sample_jets(f.as_ref(), 3, 5) {
                let frame = orthonormal_frame(&jet, &random_vector(&mut r, n)).unwrap();
                let b = riemann(&jet);
                let rf = frame_transform_rank4(&b.riem_low, &frame);
                let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                let expected = Array4::from_shape_fn((n, n, n, n), |(i, j, kk, l)| {
                    k * (d(i, kk) * d(j, l) - d(i, l) * d(j, kk))
                });
                assert!(max_diff(&rf, &expected) <= 1e-12 * k);
                assert!(rf[[0, 1, 0, 1]] > 0.0);

                let g = jet.g();
                let ricci_expected = (n - 1) as f64 * k * g;
                assert!(rel_diff(&b.ricci, &ricci_expected) <= 1e-12);
                assert!((b.scalar - (n * (n - 1)) as f64 * k).abs() <= 1e-12 * b.scalar);
                let rm_expected = 2.0 * k * k * (n - 1) as f64 * g;
                assert!(rel_diff(&b.rm_sq, &rm_expected) <= 1e-12);
            }
        }
    }
}

#[test]
fn hyperbolic_three_space_scalar() {
    let f = family("hyperbolic", 3, &[1.0]);
    for (_, jet) in sample_jets(f.as_ref(), 5, 9) {
        let b = riemann(&jet);
        assert!((b.scalar + 6.0).abs() < 1e-11, "{}", b.scalar);
    }
}

#[test]
fn product_mixed_planes_are_flat() {
    let f = family("product", 4, &[2.0, 1.0, 1.0]);
    for (_, jet) in sample_jets(f.as_ref(), 5, 2) {
        let b = riemann(&jet);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            let mut u = vec![0.0; 4];
            let mut v = vec![0.0; 4];
            u[i] = 1.0;
            v[j] = 1.0;
            let k = sectional_curvature(&b, &jet, &Plane::new(u, v).unwrap()).unwrap();
            assert!(k.abs() < 1e-13, "K_{i}{j} = {k:e}");
        }
        let k = sectional_curvature(&b, &jet, &Plane::new(vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]).unwrap())
            .unwrap();
        assert!((k - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rm_squared_matches_six_loop_contraction() {
    for n in [2, 3, 4] {
        for f in all_families(n) {
            for (_, jet) in sample_jets(f.as_ref(), 4, 21) {
                let b = riemann(&jet);
                let oracle = naive_rm_squared(&b.riem_low, jet.g()).unwrap();
                if max_abs(&oracle) == 0.0 {
                    assert_eq!(max_abs(&b.rm_sq), 0.0);
                    continue;
                }
                assert!(rel_diff(&b.rm_sq, &oracle) <= 1e-12, "{} n={n}", f.name());
                let asym = max_diff(&b.rm_sq, &b.rm_sq.t().to_owned());
                assert!(asym <= 1e-13 * max_abs(&b.rm_sq));
            }
        }
    }
}

#[test]
fn flat_metric_has_no_curvature() {
    let jet = MetricJet2::flat(3).unwrap();
    let b = riemann(&jet);
    assert_eq!(max_abs(&b.gamma), 0.0);
    assert_eq!(max_abs(&b.dgamma), 0.0);
    assert_eq!(max_abs(&b.riem_low), 0.0);
    assert_eq!(max_abs(&b.ricci), 0.0);
    assert_eq!(b.scalar, 0.0);
    assert_eq!(max_abs(&b.rm_sq), 0.0);
}

#[test]
fn metric_in_its_own_frame_is_identity() {
    let mut r = rng(8);
    let f = family("perturbed", 4, &[0.2, 3.0]);
    for (_, jet) in sample_jets(f.as_ref(), 5, 4) {
        let frame = orthonormal_frame(&jet, &random_vector(&mut r, 4)).unwrap();
        let id = frame_transform_rank2(jet.g(), &frame);
        assert!(max_diff(&id, &Array2::eye(4)) < 1e-12);
    }
    let jet = MetricJet2::constant(array![[4.0, 0.0], [0.0, 1.0]]).unwrap();
    let frame = orthonormal_frame(&jet, &[1.0, 0.0]).unwrap();
    assert_eq!(frame.vector(0), vec![0.5, 0.0]);
}

fn family_strategy() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=5, 0usize..7, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn riemann_identities_hold((n, which, seed) in family_strategy()) {
        let fams = all_families(n);
        let f = &fams[which];
        for (_, jet) in sample_jets(f.as_ref(), 2, seed) {
            let b = riemann(&jet);
            let scale = 1.0 + max_abs(&b.riem_low);
            let res = riemann_identity_residuals(&b.riem_low);
            for r in res {
                prop_assert!(r * max_abs(&b.riem_low).max(1.0) <= 1e-9 * scale, "{} residuals {res:?}", f.name());
            }
        }
    }

    #[test]
    fn sectional_curvature_ignores_plane_basis(
        (n, which, seed) in family_strategy(),
        m in prop::array::uniform4(-2.0f64..2.0),
    ) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.1);
        let fams = all_families(n);
        let f = &fams[which];
        let mut r = rng(seed ^ 0x5eed);
        for (_, jet) in sample_jets(f.as_ref(), 1, seed) {
            let b = riemann(&jet);
            let u = random_vector(&mut r, n);
            let v = random_vector(&mut r, n);
            let Ok(p) = Plane::new(u.clone(), v.clone()) else { continue };
            let Ok(k) = sectional_curvature(&b, &jet, &p) else { continue };
            let u2: Vec<f64> = (0..n).map(|i| m[0] * u[i] + m[1] * v[i]).collect();
            let v2: Vec<f64> = (0..n).map(|i| m[2] * u[i] + m[3] * v[i]).collect();
            let k2 = sectional_curvature(&b, &jet, &Plane::new(u2, v2).unwrap()).unwrap();
            prop_assert!((k - k2).abs() <= 1e-10 * k.abs().max(1.0), "{k} vs {k2}");
        }
    }

    #[test]
    fn orthonormal_frames_are_orthonormal((n, which, seed) in family_strategy()) {
        let fams = all_families(n);
        let f = &fams[which];
        let mut r = rng(seed);
        for (_, jet) in sample_jets(f.as_ref(), 2, seed) {
            let dir = random_vector(&mut r, n);
            let frame = orthonormal_frame(&jet, &dir).unwrap();
            prop_assert!(frame.orthonormality_defect(&jet) <= 1e-12);
            let e1 = frame.vector(0);
            let cross = (0..n).map(|i| e1[i] * dir[(i + 1) % n] - e1[(i + 1) % n] * dir[i]).fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(cross <= 1e-12 * dir.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 1e3);
        }
    }

    #[test]
    fn curvature_scaling_law((n, which, seed) in family_strategy()) {
        let fams = all_families(n);
        let f = &fams[which];
        let mut r = rng(seed);
        for (_, jet) in sample_jets(f.as_ref(), 1, seed) {
            let b = riemann(&jet);
            let plane = Plane::new(random_vector(&mut r, n), random_vector(&mut r, n));
            for c in [0.5, 2.0, 10.0] {
                let scaled = jet.scaled(c).unwrap();
                let bs = riemann(&scaled);
                prop_assert!(max_diff(&bs.ricci, &b.ricci) <= 1e-12 * max_abs(&b.ricci).max(1.0));
                let rm = &b.rm_sq / c;
                prop_assert!(max_diff(&bs.rm_sq, &rm) <= 1e-12 * max_abs(&rm).max(1.0));
                if let Ok(p) = &plane {
                    if let (Ok(k), Ok(ks)) = (sectional_curvature(&b, &jet, p), sectional_curvature(&bs, &scaled, p)) {
                        prop_assert!((ks - k / c).abs() <= 1e-11 * k.abs().max(1.0));
                    }
                }
            }
        }
    }
}
