//! Independent reference computations: literal-loop tensor formulas, finite
//! differences in the metric, plane-wave reconstruction of the symbol, an adaptive
//! reference integrator and a second grid discretization.
//!
//! These share no contraction code with the main modules on purpose.

mod fd;
mod grid;
mod naive;
mod reference;
mod verify;

pub use fd::{
    as_matrix, constant_perturbation, fd_metric_jet, fd_variation, richardson, symbol_from_plane_waves, Functional,
    PlaneWavePerturbation, PLANE_WAVE_FIT_TOLERANCE, PLANE_WAVE_FREQUENCIES,
};
pub use grid::{naive_deturck_field, naive_grid_rhs};
pub use naive::{
    gauss_jordan_inverse, is_positive_definite, naive_christoffel, naive_christoffel_derivative,
    naive_deturck_operator, naive_ricci, naive_riemann_lower, naive_riemann_up, naive_rm_squared,
    riemann_identity_residuals, RawJet,
};
pub use reference::{dormand_prince, ReferenceAnsatz};
pub use verify::{run_verify, FD_STEP, CheckResult, VerifyConfig, VerifyReport};
