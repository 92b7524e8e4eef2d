use serde::{Deserialize, Serialize};

use super::rk4::rk4_step;
use crate::error::{Error, Result};

/// Constant-curvature model space carrying the ansatz `g(t) = c(t) g_unit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Sphere,
    Hyperbolic,
}

impl AnsatzKind {
    /// Sectional curvature of the unit-scale metric.
    pub fn sign(self) -> f64 {
        match self {
            AnsatzKind::Sphere => 1.0,
            AnsatzKind::Hyperbolic => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AnsatzKind::Sphere => "sphere",
            AnsatzKind::Hyperbolic => "hyperbolic",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sphere" => Ok(AnsatzKind::Sphere),
            "hyperbolic" => Ok(AnsatzKind::Hyperbolic),
            other => Err(Error::UnknownFamily(format!("{other} (ansatz flows need sphere or hyperbolic)"))),
        }
    }
}

/// `g = c · g_unit` on the sphere or hyperbolic space; `K = ±1/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzState {
    pub kind: AnsatzKind,
    pub dim: usize,
    pub c: f64,
    pub t: f64,
    pub alpha: f64,
}

impl AnsatzState {
    pub fn new(kind: AnsatzKind, dim: usize, c: f64, alpha: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension {dim} < 2")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::PositivityLoss(format!("scale c = {c}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
        }
        Ok(Self { kind, dim, c, t: 0.0, alpha })
    }

    pub fn sectional(&self) -> f64 {
        self.kind.sign() / self.c
    }

    pub fn one_plus_alpha_k(&self) -> f64 {
        1.0 + self.alpha * self.sectional()
    }

    pub fn scalar(&self) -> f64 {
        let n = self.dim as f64;
        n * (n - 1.0) * self.sectional()
    }
}

/// `dc/dt` for scale `c`: with `Rc = (n−1)K g` and `Rm² = 2(n−1)K² g`,
/// `dc/dt = −2(n−1)s − α(n−1)/c` where `s = ±1`.
pub fn ansatz_rate(kind: AnsatzKind, dim: usize, alpha: f64, c: f64) -> f64 {
    let m = (dim - 1) as f64;
    -2.0 * m * kind.sign() - alpha * m / c
}

pub fn ansatz_rhs(state: &AnsatzState) -> Result<f64> {
    if !(state.c > 0.0) {
        return Err(Error::PositivityLoss(format!("scale c = {}", state.c)));
    }
    Ok(ansatz_rate(state.kind, state.dim, state.alpha, state.c))
}

/// One RK4 step; any stage with `c ≤ 0` is a positivity loss.
pub fn step_ansatz(state: &AnsatzState, dt: f64) -> Result<AnsatzState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step {dt}")));
    }
    let y = rk4_step(&[state.c], state.t, dt, |_, y| {
        ansatz_rhs(&AnsatzState { c: y[0], ..*state }).map(|v| vec![v])
    })?;
    if !(y[0] > 0.0) {
        return Err(Error::PositivityLoss(format!("scale c = {} at t = {}", y[0], state.t + dt)));
    }
    Ok(AnsatzState { c: y[0], t: state.t + dt, ..*state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ricci_flow_sphere_law() {
        let s = AnsatzState::new(AnsatzKind::Sphere, 4, 1.0, 0.0).unwrap();
        assert_eq!(ansatz_rhs(&s).unwrap(), -6.0);
        let mut st = s;
        for _ in 0..100 {
            st = step_ansatz(&st, 1e-4).unwrap();
        }
        assert!((st.c - 0.94).abs() <= 1e-10);
        assert!((st.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn large_scale_limit_and_hyperbolic_sign() {
        assert!((ansatz_rate(AnsatzKind::Sphere, 4, 2.0, 1e12) + 6.0).abs() < 1e-10);
        assert_eq!(ansatz_rate(AnsatzKind::Hyperbolic, 3, 0.0, 1.0), 4.0);
        assert_eq!(ansatz_rate(AnsatzKind::Hyperbolic, 3, 1.0, 2.0), 3.0);
    }

    #[test]
    fn stationary_scale_in_two_dimensions() {
        // bisection on the rate itself
        let alpha = -0.8;
        let f = |c: f64| ansatz_rate(AnsatzKind::Sphere, 2, alpha, c);
        let (mut a, mut b) = (0.1, 2.0);
        assert!(f(a) * f(b) < 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        assert!((0.5 * (a + b) + alpha / 2.0).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_scale_is_rejected() {
        assert!(AnsatzState::new(AnsatzKind::Sphere, 3, 0.0, 1.0).is_err());
        let s = AnsatzState { c: -1.0, ..AnsatzState::new(AnsatzKind::Sphere, 3, 1.0, 1.0).unwrap() };
        assert!(matches!(ansatz_rhs(&s), Err(Error::PositivityLoss(_))));
        let s = AnsatzState::new(AnsatzKind::Sphere, 3, 0.01, 1.0).unwrap();
        assert!(matches!(step_ansatz(&s, 0.1), Err(Error::PositivityLoss(_))));
    }

    proptest! {
        #[test]
        fn rhs_scaling_law(c in 0.1..10.0_f64, alpha in -3.0..3.0_f64, lambda in 0.2..5.0_f64, n in 2usize..6) {
            // dc/dt is invariant under (c, α) ↦ (λc, λα), which maps solutions to
            // solutions with time stretched by λ.
            for kind in [AnsatzKind::Sphere, AnsatzKind::Hyperbolic] {
                let a = ansatz_rate(kind, n, alpha, c);
                let b = ansatz_rate(kind, n, lambda * alpha, lambda * c);
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
