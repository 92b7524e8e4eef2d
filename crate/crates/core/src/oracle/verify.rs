//! The cross-check suite behind the `verify` command.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fd::{as_matrix, constant_perturbation, fd_metric_jet, fd_variation, symbol_from_plane_waves, Functional};
use super::naive::{naive_christoffel, naive_ricci, naive_riemann_lower, naive_rm_squared, riemann_identity_residuals, RawJet};
use super::reference::ReferenceAnsatz;
use crate::error::Result;
use crate::flow::{step_ansatz, AnsatzKind, AnsatzState};
use crate::geometry::{christoffel, family_from_name, riemann_with_convention, CurvatureConvention};
use crate::linalg;
use crate::linearization::d_inverse_metric;
use crate::symbol::{assemble_symbol, block_decompose, case_split_rows};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub family: String,
    pub dim: usize,
    pub params: Vec<f64>,
    pub alpha: f64,
    pub seed: u64,
    pub points: usize,
    /// Negative-control hook; anything but `Standard` must make the suite fail.
    pub convention: CurvatureConvention,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            family: "perturbed".into(),
            dim: 3,
            params: vec![0.15, 1.0],
            alpha: 1.0,
            seed: 1,
            points: 4,
            convention: CurvatureConvention::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Chart step of the five-point metric jet; below it second differences are roundoff-limited.
pub const FD_STEP: f64 = 1e-3;

fn relative<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    let mut diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for (x, y) in a.into_iter().zip(b) {
        diff = diff.max((x - y).abs());
        scale = scale.max(y.abs());
    }
    if diff == 0.0 {
        0.0
    } else {
        diff / scale.max(f64::MIN_POSITIVE)
    }
}

struct Tally {
    checks: Vec<CheckResult>,
}

impl Tally {
    fn record(&mut self, name: &str, residual: f64, tolerance: f64) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.checks.push(CheckResult { name: name.into(), residual, tolerance, passed: residual <= tolerance });
    }
}

/// Runs every cross-check at `points` sampled points of the configured family.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let fam = family_from_name(&cfg.family, cfg.dim, &cfg.params)?;
    let n = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<Vec<f64>> = (0..cfg.points.max(1)).map(|_| fam.sample_point(&mut rng)).collect();
    let covectors: Vec<Vec<f64>> =
        points.iter().map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();

    let mut worst = [0.0_f64; 11];
    for (x, xi) in points.iter().zip(&covectors) {
        let jet = fam.jet(x)?;
        let raw = RawJet::from_jet(&jet);
        let bundle = riemann_with_convention(&jet, cfg.convention);
        let fd_jet = fd_metric_jet(fam.as_ref(), x, FD_STEP)?;

        worst[0] = worst[0].max(riemann_identity_residuals(&bundle.riem_low).into_iter().fold(0.0, f64::max));
        worst[1] = worst[1].max(relative(christoffel(&jet).gamma.iter(), naive_christoffel(&fd_jet)?.iter()));
        worst[2] = worst[2].max(relative(bundle.riem_low.iter(), naive_riemann_lower(&fd_jet)?.iter()));
        let naive_r = naive_riemann_lower(&raw)?;
        worst[3] = worst[3].max(relative(bundle.riem_low.iter(), naive_r.iter()));
        worst[4] = worst[4].max(relative(bundle.ricci.iter(), naive_ricci(&naive_r, &raw.g)?.iter()));
        worst[5] = worst[5].max(relative(bundle.rm_sq.iter(), naive_rm_squared(&naive_r, &raw.g)?.iter()));

        let h = Array2::from_shape_fn((n, n), |(i, j)| 0.1 * ((i + 2 * j + i * j) as f64).cos());
        let fd = as_matrix(fd_variation(Functional::InverseMetric, &jet, &constant_perturbation(h.clone()), 1e-3)?)?;
        worst[6] = worst[6].max(linalg::max_abs((&fd - &d_inverse_metric(&h, &jet)).iter()));

        let id = assemble_symbol(&jet, &bundle, 0.0, xi)?;
        worst[7] = worst[7].max(linalg::max_abs((id.sigma() - &Array2::<f64>::eye(n * (n + 1) / 2)).iter()));

        let sym = assemble_symbol(&jet, &bundle, cfg.alpha, xi)?;
        let structural = match (block_decompose(&sym), case_split_rows(&sym)) {
            (Ok(b), Ok(_)) => {
                let ds = sym.determinant();
                let dn = linalg::determinant(&b.nu);
                (ds - dn).abs() / dn.abs().max(f64::MIN_POSITIVE)
            }
            _ => f64::INFINITY,
        };
        worst[8] = worst[8].max(structural);
    }

    // plane waves at the first point only; they dominate the cost
    let jet = fam.jet(&points[0])?;
    let bundle = riemann_with_convention(&jet, cfg.convention);
    let sym = assemble_symbol(&jet, &bundle, cfg.alpha, &covectors[0])?;
    worst[9] = match symbol_from_plane_waves(&jet, cfg.alpha, &covectors[0], Some(sym.frame())) {
        Ok(pw) => linalg::max_abs((&pw - sym.sigma()).iter()),
        Err(_) => f64::INFINITY,
    };

    let c0 = 4.0 * (n - 1) as f64 + 2.0 * cfg.alpha.abs();
    let reference = ReferenceAnsatz::new(1.0, n)?.trajectory(cfg.alpha, c0, &[1.0])?[0];
    let mut st = AnsatzState::new(AnsatzKind::Sphere, n, c0, cfg.alpha)?;
    for _ in 0..1000 {
        st = step_ansatz(&st, 1e-3)?;
    }
    worst[10] = (st.c - reference).abs();

    let mut t = Tally { checks: Vec::new() };
    t.record("riemann_symmetry", worst[0], 1e-9);
    t.record("christoffel_vs_fd", worst[1], 1e-7);
    t.record("riemann_vs_fd", worst[2], 1e-7);
    t.record("riemann_vs_naive", worst[3], 1e-10);
    t.record("ricci_vs_naive", worst[4], 1e-10);
    t.record("rm_squared_vs_naive", worst[5], 1e-10);
    t.record("inverse_metric_variation", worst[6], 1e-10);
    t.record("symbol_identity_at_zero_alpha", worst[7], 1e-12);
    t.record("symbol_block_structure", worst[8], 1e-10);
    t.record("plane_wave_symbol", worst[9], 2e-2);
    t.record("ansatz_vs_reference", worst[10], 1e-8);
    Ok(VerifyReport { checks: t.checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = run_verify(&VerifyConfig::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn corrupted_convention_fails_symmetry() {
        let cfg = VerifyConfig { convention: CurvatureConvention::CorruptedQuadraticSign, ..VerifyConfig::default() };
        let r = run_verify(&cfg).unwrap();
        let sym = r.checks.iter().find(|c| c.name == "riemann_symmetry").unwrap();
        assert!(!sym.passed);
        assert!(!r.all_passed());
        let id = r.checks.iter().find(|c| c.name == "symbol_identity_at_zero_alpha").unwrap();
        assert!(id.passed);
    }
}
