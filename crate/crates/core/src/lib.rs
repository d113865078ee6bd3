//! Conserved quantities (intertwining operators) and exponentially evolving
//! eigen-operators of finite-dimensional non-Hermitian Hamiltonians.
//!
//! An operator `eta` with `eta H = H^dagger eta` has a time-independent
//! expectation value under `exp(-iHt)`. Vectorizing `eta` turns the search
//! for such operators into an eigenproblem of the N^2 x N^2 superoperator
//! `L = -i (H^T ⊗ 1 - 1 ⊗ H^dagger)`: its zero modes are the conserved
//! quantities and every other eigenvector evolves as a single exponential.
//! For time-periodic Hamiltonians the same role is played by
//! `G = G_F^T ⊗ G_F^dagger` and its unit-multiplier eigenvectors.

pub mod error;
pub mod floquet;
pub mod liouvillian;
pub mod models;
pub mod numlin;
pub mod random;
pub mod selfcheck;
pub mod vectorize;

pub use error::{Error, Result};
pub use numlin::{ComplexMatrix, Spectrum, Tolerances};
