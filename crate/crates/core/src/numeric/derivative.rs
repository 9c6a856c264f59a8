use super::eigen::{eig_hermitian_with, EigenDecomposition};
use super::matrix::{dot, ComplexMatrix};
use super::Tolerances;
use crate::error::{Error, Result};

/// How a directional eigenvalue derivative is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// ⟨p|Δ|p⟩ for a nondegenerate eigenvector.
    HellmannFeynman,
    /// (λ_p(A + hΔ) − λ_p(A − hΔ)) / 2h
    CentralDifference { h: f64 },
}

fn check_pair(a: &ComplexMatrix, delta: &ComplexMatrix, p: usize, tol: &Tolerances) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    if delta.rows() != a.rows() || delta.cols() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: delta.rows(),
        });
    }
    delta.check_hermitian(tol.hermitian)?;
    if p >= a.rows() {
        return Err(Error::IndexOutOfRange {
            index: p,
            size: a.rows(),
        });
    }
    Ok(())
}

/// Index range of the eigenvalues that sit within `gap` of eigenvalue `p`,
/// chained through neighbours.
fn cluster(values: &[f64], p: usize, gap: f64) -> std::ops::Range<usize> {
    let mut lo = p;
    while lo > 0 && values[lo] - values[lo - 1] <= gap {
        lo -= 1;
    }
    let mut hi = p + 1;
    while hi < values.len() && values[hi] - values[hi - 1] <= gap {
        hi += 1;
    }
    lo..hi
}

/// d/ds λ_p(A + sΔ) at s = 0, with p indexing the ascending spectrum of A.
pub fn directional_eigen_derivative(
    a: &ComplexMatrix,
    delta: &ComplexMatrix,
    p: usize,
    mode: DerivativeMode,
) -> Result<f64> {
    let tol = Tolerances::default();
    check_pair(a, delta, p, &tol)?;
    match mode {
        DerivativeMode::HellmannFeynman => {
            let eig = eig_hermitian_with(a, &tol)?;
            let gap = tol.degenerate_gap * a.frobenius_norm();
            let range = cluster(&eig.values, p, gap);
            if range.len() > 1 {
                let other = if range.start < p { p - 1 } else { p + 1 };
                return Err(Error::DegenerateEigenvalue {
                    index: p,
                    gap: (eig.values[p] - eig.values[other]).abs(),
                });
            }
            Ok(expectation(&eig, delta, p))
        }
        DerivativeMode::CentralDifference { h } => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
            }
            let plus = eig_hermitian_with(&(a + &delta.scale_real(h)), &tol)?;
            let minus = eig_hermitian_with(&(a - &delta.scale_real(h)), &tol)?;
            Ok((plus.values[p] - minus.values[p]) / (2.0 * h))
        }
    }
}

fn expectation(eig: &EigenDecomposition, delta: &ComplexMatrix, p: usize) -> f64 {
    let v = eig.vector(p);
    dot(&v, &delta.matvec(&v)).re
}

/// Degenerate perturbation theory: the derivatives of the eigenvalues in the
/// cluster containing `p` are the eigenvalues of Δ restricted to that
/// eigenspace. Returned ascending; a nondegenerate `p` yields one value.
pub fn degenerate_eigen_derivatives(a: &ComplexMatrix, delta: &ComplexMatrix, p: usize) -> Result<Vec<f64>> {
    let tol = Tolerances::default();
    check_pair(a, delta, p, &tol)?;
    let eig = eig_hermitian_with(a, &tol)?;
    let range = cluster(&eig.values, p, tol.degenerate_gap * a.frobenius_norm());
    let basis = eig.vectors.columns(range.start, range.end);
    let restricted = basis.adjoint().matmul(delta).matmul(&basis);
    Ok(eig_hermitian_with(&restricted, &Tolerances { hermitian: 1e-9, ..tol })?.values)
}
