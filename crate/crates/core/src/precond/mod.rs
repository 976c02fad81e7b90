//! Helmholtz preconditioners: one-level ORAS and two-level variants with
//! grid, DtN, H-GenEO and Δ-GenEO coarse spaces.
//!
//! Every coarse space ends up as a [`CoarseSpace`] (basis `Z`, `E = ZᴴAZ`
//! and a factorization of `E`), and [`TwoLevel`] couples it with any
//! one-level operator, additively or in the hybrid `QM⁻¹P + H` form.

mod coarse;
mod grid;
mod oras;
mod spectral;

pub use coarse::{CoarseBasis, CoarseSpace, Provenance, TwoLevel, TwoLevelMode};
pub use grid::{build_grid_cs, interpolation_matrix};
pub use oras::OneLevelOras;
pub use spectral::{build_deltageneo_cs, build_dtn_cs, build_hgeneo_cs, dtn_eigenpairs, DtnLocal};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// `Re λ < k_j`, the local maximum wavenumber (DtN).
    BelowWavenumber,
    /// `Re λ > λ_min` (GenEO variants).
    Above(f64),
    /// `|λ − 1| > t`, farthest first. Modes on which the Laplacian and the
    /// Helmholtz Neumann form disagree (H-GenEO).
    Deviation(f64),
    /// The `m` eigenvalues with largest real part.
    Largest(usize),
}

/// Which local eigenpairs enter the coarse space, at most `cap` per subdomain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSelection {
    pub rule: SelectionRule,
    pub cap: usize,
}

impl EigenSelection {
    pub const DEFAULT_LAMBDA_MIN: f64 = 0.5;
    pub const DEFAULT_CAP: usize = 20;

    pub fn dtn() -> Self {
        Self { rule: SelectionRule::BelowWavenumber, cap: Self::DEFAULT_CAP }
    }

    pub fn geneo() -> Self {
        Self { rule: SelectionRule::Above(Self::DEFAULT_LAMBDA_MIN), cap: Self::DEFAULT_CAP }
    }

    pub fn hgeneo() -> Self {
        Self { rule: SelectionRule::Deviation(Self::DEFAULT_LAMBDA_MIN), cap: Self::DEFAULT_CAP }
    }

    pub fn with_cap(self, cap: usize) -> Self {
        Self { cap, ..self }
    }
}

#[cfg(test)]
mod tests;
