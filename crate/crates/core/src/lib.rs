//! Overlapping Schwarz preconditioners for 2D heterogeneous Helmholtz and
//! positive Maxwell problems.
//!
//! The crate is layered bottom-up:
//!
//! - [`numkit`]: sparse matrices, LU, dense generalized eigenproblems, GMRES/CG.
//! - [`helmholtz`]: structured triangle meshes, P1/P2 assembly, velocity
//!   models, resolution rules and 1D dispersion analysis.
//! - [`dd`]: geometric partitions, overlap, partition of unity, local matrices.
//! - [`precond`]: one-level ORAS and the grid, DtN, H-GenEO and Δ-GenEO
//!   coarse spaces with additive or hybrid coupling.
//! - [`maxwell`]: Whitney edge elements, the auxiliary space preconditioner
//!   and two-level additive Schwarz with a near-kernel + GenEO coarse space.
//! - [`bench`]: run configurations, sweeps and report emission behind the
//!   `wavedd` binary.

pub mod bench;
pub mod dd;
pub mod error;
pub mod helmholtz;
pub mod maxwell;
pub mod numkit;
pub mod precond;

pub use error::{Error, Result};
