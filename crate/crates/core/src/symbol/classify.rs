use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assemble::{assemble_symbol, diagonalize_r1m1n};
use super::report::{ParabolicityReport, PlaneWitness, SampleRecord};
use super::Verdict;
use crate::error::{Error, Result};
use crate::geometry::{riemann, sectional_curvature, sectional_extremes, MetricFamily, Plane};
use crate::linalg;

/// Where and how densely to probe a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    /// Chart points to evaluate.
    pub points: Vec<Vec<f64>>,
    /// Random covectors per point, on top of the coordinate covectors `dx^a`.
    pub random_directions: usize,
    /// Random planes per point, on top of the diagonalizing-frame coordinate planes.
    pub random_planes: usize,
    pub seed: u64,
    /// Band around zero treated as degenerate.
    pub tolerance: f64,
}

impl SamplingSpec {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    pub fn at_points(points: Vec<Vec<f64>>, seed: u64) -> Self {
        Self { points, random_directions: 2, random_planes: 8, seed, tolerance: Self::DEFAULT_TOLERANCE }
    }

    /// `count` points drawn from the family's sampling domain.
    pub fn random(family: &dyn MetricFamily, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count).map(|_| family.sample_point(&mut rng)).collect();
        Self::at_points(points, seed)
    }
}

#[derive(Debug, Clone)]
struct PlaneSample {
    sectional: f64,
    plane: Plane,
}

#[derive(Debug, Clone)]
struct DirectionSample {
    xi: Vec<f64>,
    /// Eigenvalues of `ν(1) − I`; since `ν(α) = I + α(ν(1) − I)`, the spectrum at
    /// any α is `1 + α·μ`.
    nu_shift_eigenvalues: Vec<Complex64>,
    /// Diagonal of `ν(1) − I` in the diagonalizing frame, `(κ_i + κ_j)/2`.
    nu_diagonal_shift: Vec<f64>,
}

#[derive(Debug, Clone)]
struct PointSample {
    point: Vec<f64>,
    planes: Vec<PlaneSample>,
    directions: Vec<DirectionSample>,
}

/// α-independent geometric data collected once per sampling spec; every α is
/// then evaluated in closed form from it.
#[derive(Debug, Clone)]
pub struct ClassifierGeometry {
    samples: Vec<PointSample>,
    tolerance: f64,
}

impl ClassifierGeometry {
    pub fn build(family: &dyn MetricFamily, spec: &SamplingSpec) -> Result<Self> {
        if spec.points.is_empty() {
            return Err(Error::EmptySampling);
        }
        let n = family.dim();
        for p in &spec.points {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.len() });
            }
        }
        let samples = spec
            .points
            .par_iter()
            .enumerate()
            .map(|(idx, x)| sample_point(family, x, spec, idx as u64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { samples, tolerance: spec.tolerance })
    }

    pub fn point_count(&self) -> usize {
        self.samples.len()
    }

    /// Extreme sectional curvatures over every sampled plane.
    pub fn sectional_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            for p in &s.planes {
                lo = lo.min(p.sectional);
                hi = hi.max(p.sectional);
            }
        }
        (lo, hi)
    }

    fn extreme_plane(&self, alpha: f64, want_min: bool) -> (f64, PlaneWitness) {
        let mut best: Option<(f64, PlaneWitness)> = None;
        for s in &self.samples {
            for p in &s.planes {
                let v = 1.0 + alpha * p.sectional;
                let better = match &best {
                    None => true,
                    Some((b, _)) => (want_min && v < *b) || (!want_min && v > *b),
                };
                if better {
                    best = Some((
                        v,
                        PlaneWitness {
                            point: s.point.clone(),
                            u: p.plane.u().to_vec(),
                            v: p.plane.v().to_vec(),
                            sectional: p.sectional,
                        },
                    ));
                }
            }
        }
        best.expect("sampling is nonempty")
    }

    pub fn one_plus_alpha_k_range(&self, alpha: f64) -> (f64, f64) {
        let (lo, hi) = self.sectional_range();
        let a = 1.0 + alpha * lo;
        let b = 1.0 + alpha * hi;
        (a.min(b), a.max(b))
    }

    /// Smallest and largest real part over all sampled `ν` spectra.
    pub fn nu_real_range(&self, alpha: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            for d in &s.directions {
                for mu in &d.nu_shift_eigenvalues {
                    let re = 1.0 + alpha * mu.re;
                    lo = lo.min(re);
                    hi = hi.max(re);
                }
            }
        }
        (lo, hi)
    }

    pub fn verdict(&self, alpha: f64) -> Verdict {
        let (min, max) = self.one_plus_alpha_k_range(alpha);
        let (re_min, _) = self.nu_real_range(alpha);
        Verdict::from_range(min, max, re_min > self.tolerance, self.tolerance)
    }

    pub fn report(&self, alpha: f64) -> ParabolicityReport {
        let (min, min_witness) = self.extreme_plane(alpha, true);
        let (max, max_witness) = self.extreme_plane(alpha, false);
        let mut records = Vec::new();
        let mut worst: Option<(f64, Vec<Complex64>, f64)> = None;
        let mut nu_diagonal_min = f64::INFINITY;
        for s in &self.samples {
            let local_min = s.planes.iter().map(|p| 1.0 + alpha * p.sectional).fold(f64::INFINITY, f64::min);
            let local_max = s.planes.iter().map(|p| 1.0 + alpha * p.sectional).fold(f64::NEG_INFINITY, f64::max);
            for d in &s.directions {
                let spectrum: Vec<Complex64> =
                    d.nu_shift_eigenvalues.iter().map(|mu| Complex64::new(1.0, 0.0) + alpha * mu).collect();
                let det: f64 = spectrum.iter().fold(Complex64::new(1.0, 0.0), |acc, z| acc * z).re;
                let re_min = spectrum.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                for k in &d.nu_diagonal_shift {
                    nu_diagonal_min = nu_diagonal_min.min(1.0 + alpha * k);
                }
                if worst.as_ref().is_none_or(|(w, _, _)| re_min < *w) {
                    worst = Some((re_min, spectrum.clone(), det));
                }
                records.push(SampleRecord {
                    point: s.point.clone(),
                    xi: d.xi.clone(),
                    min_one_plus_alpha_k: local_min,
                    max_one_plus_alpha_k: local_max,
                    nu_real_min: re_min,
                    det_nu: det,
                });
            }
        }
        let (_, spectrum, det_nu) = worst.expect("sampling is nonempty");
        let spectrum_positive = records.iter().all(|r| r.nu_real_min > self.tolerance);
        ParabolicityReport {
            verdict: Verdict::from_range(min, max, spectrum_positive, self.tolerance),
            alpha,
            min_one_plus_alpha_k: min,
            min_witness,
            max_one_plus_alpha_k: max,
            max_witness,
            nu_eigenvalues: spectrum.iter().map(|z| [z.re, z.im]).collect(),
            det_nu,
            nu_diagonal_min,
            tolerance: self.tolerance,
            sample_points: records,
        }
    }
}

fn sample_point(family: &dyn MetricFamily, x: &[f64], spec: &SamplingSpec, stream: u64) -> Result<PointSample> {
    let n = family.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream + 1);
    let jet = family.jet(x)?;
    let bundle = riemann(&jet);

    let mut covectors: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            e
        })
        .collect();
    for _ in 0..spec.random_directions {
        covectors.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }

    let mut planes = Vec::new();
    let mut directions = Vec::new();
    let mut seeds = Vec::new();
    for xi in covectors {
        if xi.iter().all(|v| *v == 0.0) {
            continue;
        }
        let sym = assemble_symbol(&jet, &bundle, 1.0, &xi)?;
        let nu_shift = sym.nu_block() - &ndarray::Array2::<f64>::eye(n * (n - 1) / 2);
        let diag = diagonalize_r1m1n(sym.riem_frame(), sym.frame());
        for a in 0..n {
            for b in a + 1..n {
                planes.push(PlaneSample {
                    sectional: diag.riem_frame[[a, b, a, b]],
                    plane: Plane::new(diag.frame.vector(a), diag.frame.vector(b))?,
                });
            }
            seeds.push(diag.frame.vector(a));
        }
        let mut nu_diagonal_shift = Vec::new();
        for i in 0..n - 1 {
            for j in i + 1..n - 1 {
                nu_diagonal_shift.push(0.5 * (diag.kappa[i] + diag.kappa[j]));
            }
        }
        directions.push(DirectionSample {
            xi,
            nu_shift_eigenvalues: linalg::try_eigenvalues(&nu_shift)
                .ok_or(Error::NonConvergence { what: "Schur iteration for the ν spectrum", value: f64::NAN })?,
            nu_diagonal_shift,
        });
    }

    for _ in 0..spec.random_planes {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let plane = Plane::new(u, v)?;
        match sectional_curvature(&bundle, &jet, &plane) {
            Ok(k) => planes.push(PlaneSample { sectional: k, plane }),
            Err(Error::DegeneratePlane(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let ext = sectional_extremes(&bundle, &jet, &seeds)?;
    planes.push(PlaneSample { sectional: ext.min, plane: ext.min_plane });
    planes.push(PlaneSample { sectional: ext.max, plane: ext.max_plane });

    Ok(PointSample { point: x.to_vec(), planes, directions })
}

/// Samples the family and classifies the DeTurck RG-2 system at coupling `alpha`.
pub fn classify_parabolicity(family: &dyn MetricFamily, alpha: f64, spec: &SamplingSpec) -> Result<ParabolicityReport> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
    }
    Ok(ClassifierGeometry::build(family, spec)?.report(alpha))
}

/// One line of an α sweep; `kind` is `sample` for grid values and `threshold`
/// for bisected sign changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: String,
    pub alpha: f64,
    pub verdict: Verdict,
    pub min_one_plus_alpha_k: f64,
    pub max_one_plus_alpha_k: f64,
    pub nu_real_min: f64,
    pub nu_real_max: f64,
}

/// A sign change of `min` or `max` of `1 + αK` bracketed to within `width`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCrossing {
    pub alpha: f64,
    /// `"min"` or `"max"`.
    pub quantity: &'static str,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub crossings: Vec<ThresholdCrossing>,
}

pub const THRESHOLD_TOLERANCE: f64 = 1e-6;

/// Evaluates `count` equally spaced couplings in `[lo, hi]` and bisects every sign
/// change of the extreme values of `1 + αK`.
pub fn sweep_alpha(
    family: &dyn MetricFamily,
    lo: f64,
    hi: f64,
    count: usize,
    spec: &SamplingSpec,
) -> Result<SweepResult> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || count == 0 || (count == 1 && lo != hi) {
        return Err(Error::InvalidParameter(format!("alpha range [{lo}, {hi}] with {count} values")));
    }
    let geometry = ClassifierGeometry::build(family, spec)?;
    let alphas: Vec<f64> = if count == 1 {
        vec![lo]
    } else {
        (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
    };
    let row = |kind: &str, alpha: f64| {
        let (min, max) = geometry.one_plus_alpha_k_range(alpha);
        let (re_min, re_max) = geometry.nu_real_range(alpha);
        SweepRow {
            kind: kind.to_string(),
            alpha,
            verdict: geometry.verdict(alpha),
            min_one_plus_alpha_k: min,
            max_one_plus_alpha_k: max,
            nu_real_min: re_min,
            nu_real_max: re_max,
        }
    };
    let mut rows: Vec<SweepRow> = alphas.par_iter().map(|&a| row("sample", a)).collect();

    let mut crossings = Vec::new();
    let extremes: [(&'static str, fn(f64, f64) -> f64); 2] = [("min", |a, _| a), ("max", |_, b| b)];
    for (name, pick) in extremes {
        let f = |a: f64| {
            let (x, y) = geometry.one_plus_alpha_k_range(a);
            pick(x, y)
        };
        for w in alphas.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (mut fa, fb) = (f(a), f(b));
            if fa == 0.0 {
                crossings.push(ThresholdCrossing { alpha: a, quantity: name, width: 0.0 });
                continue;
            }
            if fa.signum() == fb.signum() || fb == 0.0 {
                continue;
            }
            while b - a > 0.1 * THRESHOLD_TOLERANCE {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            crossings.push(ThresholdCrossing { alpha: 0.5 * (a + b), quantity: name, width: b - a });
        }
        if let Some(&last) = alphas.last() {
            if f(last) == 0.0 && alphas.len() > 1 {
                crossings.push(ThresholdCrossing { alpha: last, quantity: name, width: 0.0 });
            }
        }
    }
    crossings.sort_by(|x, y| x.alpha.total_cmp(&y.alpha));
    crossings.dedup_by(|x, y| x.quantity == y.quantity && x.alpha == y.alpha);
    for c in &crossings {
        rows.push(row("threshold", c.alpha));
    }
    rows.sort_by(|x, y| x.alpha.total_cmp(&y.alpha));
    Ok(SweepResult { rows, crossings })
}
