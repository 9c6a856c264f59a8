//! Dense complex linear algebra and the classical oracles that the quantum
//! pipeline is checked against.

mod derivative;
mod eigen;
pub mod io;
mod lu;
mod matrix;
mod svd;

pub use derivative::{
    degenerate_eigen_derivatives, directional_eigen_derivative, DerivativeMode,
};
pub use eigen::{eig_hermitian, eig_hermitian_with, psd_sqrt, psd_sqrt_with, unitary_phase_exp, EigenDecomposition};
pub use lu::{inverse, inverse_with, logdet_lu, logdet_lu_with, LuDecomposition};
pub use matrix::{dot, norm, normalized, presets, ComplexMatrix, C64, I, ONE, ZERO};
pub use svd::{orthonormalize_svd, orthonormalize_svd_with, singular_values, OrthonormalBlock};

/// Numerical thresholds shared by the numeric routines.
///
/// All values are relative to the matrix scale named in each field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity defect relative to max |a_ij|.
    pub hermitian: f64,
    /// Smallest admissible LU pivot relative to ‖A‖_F.
    pub pivot: f64,
    /// Most negative eigenvalue (relative to ‖B‖_F) clamped to zero by `psd_sqrt`.
    pub psd_clamp: f64,
    /// Smallest admissible singular value ratio for an orthonormalized block.
    pub rank: f64,
    /// Eigenvalue gap (relative to ‖A‖_F) below which eigenvalues count as degenerate.
    pub degenerate_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            pivot: 1e-13,
            psd_clamp: 1e-12,
            rank: 1e-10,
            degenerate_gap: 1e-8,
        }
    }
}
