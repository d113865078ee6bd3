//! Dense complex linear algebra kernels.

mod assign;
mod eigen;
mod expm;
mod lu;
mod matrix;
mod svd;

pub use assign::{match_spectra, min_cost_assignment};
pub use eigen::{eig, eigenvalues, normalize_phase, Spectrum};
pub use expm::{matexp, propagate};
pub use lu::{det, inverse, solve};
pub use matrix::{expectation, vec_dot, vec_norm, ComplexMatrix, I, ONE, ZERO};
pub use svd::{condition_number, null_space, orthonormal_basis, rank, subspace_distance, svd, Svd};

/// Default relative eigen-residual tolerance.
pub const DEFAULT_TOL_EIG: f64 = 1e-9;
/// Default relative singular-value cutoff.
pub const DEFAULT_TOL_RANK: f64 = 1e-9;

/// Tolerances threaded through the analyses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eig: f64,
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig: DEFAULT_TOL_EIG,
            rank: DEFAULT_TOL_RANK,
        }
    }
}
