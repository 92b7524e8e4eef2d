use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is singular to working precision (eigenvalue ratio {ratio:e})")]
    SingularMetric { ratio: f64 },

    #[error("metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("invalid metric jet: {0}")]
    InvalidJet(String),

    #[error("degenerate plane (Gram determinant {0:e})")]
    DegeneratePlane(f64),

    #[error("zero direction vector")]
    ZeroVector,

    #[error("tensor valence mismatch: {0}")]
    ValenceMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mu block of the symbol is not zero (max entry {0:e})")]
    NonzeroMuBlock(f64),

    #[error("top-left block of the symbol is not the identity (deviation {0:e})")]
    IdentityBlock(f64),

    #[error("symbol row h_{}{} disagrees with its case formula by {residual:e}", .row.0 + 1, .row.1 + 1)]
    CaseMismatch { row: (usize, usize), residual: f64 },

    #[error("sampling specification is empty")]
    EmptySampling,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown metric family `{0}`")]
    UnknownFamily(String),

    #[error("positivity lost: {0}")]
    PositivityLoss(String),

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("initial data is {0}; refusing to flow without override")]
    NotParabolic(crate::symbol::Verdict),

    #[error("{what} did not converge ({value:e})")]
    NonConvergence { what: &'static str, value: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
