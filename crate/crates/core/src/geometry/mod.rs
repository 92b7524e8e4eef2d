//! Pointwise Riemannian tensor algebra.
//!
//! Everything here is a pure function of a [`MetricJet2`], the metric together
//! with its first and second coordinate derivatives at one chart point.

mod curvature;
mod families;
mod frame;
mod jet;
mod sectional;

pub use curvature::{
    christoffel, riemann, riemann_with_convention, ricci_and_scalar, rm_squared,
    sectional_curvature, Christoffel, CurvatureBundle, CurvatureConvention,
};
pub use families::{family_from_name, MetricFamily, FAMILY_NAMES};
pub use frame::{
    frame_transform, frame_transform_rank2, frame_transform_rank4, orthonormal_frame, Frame,
};
pub use jet::{MetricJet2, DEGENERACY_RATIO};
pub use sectional::{sectional_extremes, Plane, SectionalExtremes};

/// Relative tolerances used by the symmetry and finite-difference checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub symmetry: f64,
    pub finite_difference: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { symmetry: 1e-9, finite_difference: 1e-7 }
    }
}
