//! The principal symbol `Σ` of the DeTurck-modified RG-2 operator and the
//! `1 + αK` parabolicity classifier.
//!
//! With `ξ = e_1` in a g-orthonormal frame, the symbol acting on a symmetric `h` is
//!
//! ```text
//! σ(h)_ij = h_ij + (α/2) R_ik1u δ_j1 h_ku − (α/2) R_i11u h_ju
//!                + (α/2) R_jk1u δ_i1 h_ku − (α/2) R_j11u h_iu
//! ```
//!
//! Ordering the components `h_11, h_12, …, h_1n, h_22, …, h_nn` turns `σ` into an
//! `N × N` matrix with `N = n(n+1)/2` and block form `[[I, λ], [0, ν]]`.

mod assemble;
mod classify;
mod index;
mod report;

pub use assemble::{
    assemble_symbol, assemble_symbol_in_frame, block_decompose, case_split_rows, diagonalize_r1m1n,
    golden_nu_4d, symbol_action, CaseRows, Diagonalization, SymbolBlocks, SymbolMatrix,
};
pub use classify::{
    classify_parabolicity, sweep_alpha, ClassifierGeometry, SamplingSpec, SweepResult, SweepRow,
    ThresholdCrossing, THRESHOLD_TOLERANCE,
};
pub use index::IndexMap;
pub use report::{read_sweep_csv, write_sweep_csv, ParabolicityReport, PlaneWitness, SampleRecord};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Parabolicity verdict for the DeTurck RG-2 system at given initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Parabolic,
    BackwardParabolic,
    Degenerate,
    Indefinite,
}

impl Verdict {
    /// Verdict from the range of `1 + αK_P` over sampled planes.
    ///
    /// `spectrum_positive` reports whether every sampled `ν` spectrum has
    /// strictly positive real part.
    pub fn from_range(min: f64, max: f64, spectrum_positive: bool, tolerance: f64) -> Self {
        if min > tolerance {
            if spectrum_positive {
                Verdict::Parabolic
            } else {
                Verdict::Indefinite
            }
        } else if max < -tolerance {
            Verdict::BackwardParabolic
        } else if min < -tolerance && max > tolerance {
            Verdict::Indefinite
        } else {
            Verdict::Degenerate
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Parabolic => "parabolic",
            Verdict::BackwardParabolic => "backward_parabolic",
            Verdict::Degenerate => "degenerate",
            Verdict::Indefinite => "indefinite",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "parabolic" => Ok(Verdict::Parabolic),
            "backward_parabolic" => Ok(Verdict::BackwardParabolic),
            "degenerate" => Ok(Verdict::Degenerate),
            "indefinite" => Ok(Verdict::Indefinite),
            other => Err(crate::Error::Format(format!("unknown verdict `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_from_range() {
        assert_eq!(Verdict::from_range(2.0, 2.0, true, 1e-9), Verdict::Parabolic);
        assert_eq!(Verdict::from_range(2.0, 2.0, false, 1e-9), Verdict::Indefinite);
        assert_eq!(Verdict::from_range(-1.0, -1.0, false, 1e-9), Verdict::BackwardParabolic);
        assert_eq!(Verdict::from_range(-1.0, 1.0, false, 1e-9), Verdict::Indefinite);
        assert_eq!(Verdict::from_range(0.0, 1.0, true, 1e-9), Verdict::Degenerate);
        assert_eq!(Verdict::from_range(-1.0, 0.0, false, 1e-9), Verdict::Degenerate);
    }

    #[test]
    fn verdict_round_trips_through_text() {
        for v in [Verdict::Parabolic, Verdict::BackwardParabolic, Verdict::Degenerate, Verdict::Indefinite] {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
        }
        assert!("sideways".parse::<Verdict>().is_err());
    }
}
