//! Curvature algebra, principal-symbol analysis and reduced time integration
//! for the second-order renormalization group (RG-2) flow
//!
//! ```text
//! ∂g/∂t = −2 Rc − (α/2) Rm²,   Rm²_ij = g^{pk} g^{ql} g^{nm} R_iklm R_jpqn
//! ```
//!
//! and its DeTurck-modified form `∂g/∂t = −2 Rc + L_W g − (α/2) Rm²`.
//!
//! * [`geometry`]: pointwise tensor algebra from a metric 2-jet, analytic metric families.
//! * [`linearization`]: principal parts of the variations of `Rm` and `Rm²`.
//! * [`symbol`]: the symbol matrix `Σ`, its block structure and the `1 + αK` classifier.
//! * [`flow`]: constant-curvature ODE reduction and periodic-grid DeTurck flow.
//! * [`oracle`]: brute-force cross-checks (finite differences, plane waves, naive loops).
//!
//! Curvature sign convention: `R_ijkl = g_km R^m_ijl` with
//! `R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_ip Γ^p_jk − Γ^l_jp Γ^p_ik`, so that in an
//! orthonormal frame `R_1212` is the sectional curvature of the `(e_1, e_2)` plane
//! and the round sphere of radius `r` has `R_ijkl = r⁻² (g_ik g_jl − g_il g_jk)`.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod linalg;
pub mod linearization;
pub mod oracle;
pub mod symbol;

pub use error::{Error, Result};
pub use geometry::{CurvatureBundle, Frame, MetricFamily, MetricJet2, Plane};
pub use symbol::{ParabolicityReport, SymbolMatrix, Verdict};

/// Crate version, recorded in the headers of every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
