use super::matrix::{ComplexMatrix, C64, ZERO};
use super::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, p: usize) -> Vec<C64> {
        self.vectors.column(p)
    }

    /// V·f(Λ)·V†
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&e| f(e)).collect();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            for (j, &w) in fv.iter().enumerate() {
                scaled[(i, j)] *= w;
            }
        }
        scaled.matmul(&self.vectors.adjoint())
    }
}

/// Unitary 2×2 rotation `G` (acting on indices p < q) that annihilates the
/// (p, q) entry of `G† A G` for the hermitian pair block
/// [[app, apq], [conj(apq), aqq]].
///
/// Returned as (g_pp, g_pq, g_qp, g_qq).
pub(crate) fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (C64, C64, C64, C64) {
    let mag = apq.norm();
    let phase = apq.conj() / mag; // e^{-iφ}
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    (
        C64::new(c, 0.0),
        C64::new(s, 0.0),
        phase * (-s),
        phase * c,
    )
}

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    eig_hermitian_with(a, &Tolerances::default())
}

/// Cyclic Jacobi diagonalization of a hermitian matrix.
///
/// Eigenvalues come out ascending. Each eigenvector's phase is fixed by making
/// its first component with modulus above 1e-10 real and positive.
pub fn eig_hermitian_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    a.check_hermitian(tol.hermitian)?;
    let n = a.dim();
    // Symmetrize so the iteration sees an exactly hermitian input.
    let mut w = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(a[(i, i)].re, 0.0)
        } else {
            0.5 * (a[(i, j)] + a[(j, i)].conj())
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let scale = w.frobenius_norm();

    if scale > 0.0 {
        let threshold = f64::EPSILON * 1e-3 * scale;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = w[(p, q)];
                    if apq.norm() <= threshold {
                        if apq != ZERO {
                            w[(p, q)] = ZERO;
                            w[(q, p)] = ZERO;
                        }
                        continue;
                    }
                    rotated = true;
                    let (gpp, gpq, gqp, gqq) = jacobi_rotation(w[(p, p)].re, w[(q, q)].re, apq);
                    // columns: A ← A G
                    for k in 0..n {
                        let akp = w[(k, p)];
                        let akq = w[(k, q)];
                        w[(k, p)] = akp * gpp + akq * gqp;
                        w[(k, q)] = akp * gpq + akq * gqq;
                    }
                    // rows: A ← G† A
                    for k in 0..n {
                        let apk = w[(p, k)];
                        let aqk = w[(q, k)];
                        w[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                        w[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                    }
                    w[(p, q)] = ZERO;
                    w[(q, p)] = ZERO;
                    w[(p, p)] = C64::new(w[(p, p)].re, 0.0);
                    w[(q, q)] = C64::new(w[(q, q)].re, 0.0);
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * gpp + vkq * gqp;
                        v[(k, q)] = vkp * gpq + vkq * gqq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| w[(x, x)].re.total_cmp(&w[(y, y)].re));
    let values = order.iter().map(|&i| w[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut column = v.column(src);
        fix_phase_first_component(&mut column);
        vectors.set_column(col, &column);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Rotates the global phase so the first component above 1e-10 is real positive.
pub(crate) fn fix_phase_first_component(v: &mut [C64]) {
    if let Some(&lead) = v.iter().find(|z| z.norm() > 1e-10) {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// exp(i·t·A) through the eigendecomposition of A.
pub fn unitary_phase_exp(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(a)?;
    Ok(eig.map(|e| C64::from_polar(1.0, t * e)))
}

pub fn psd_sqrt(b2: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_sqrt_with(b2, &Tolerances::default())
}

/// Hermitian square root of a positive-semidefinite matrix.
pub fn psd_sqrt_with(b2: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = eig_hermitian_with(b2, tol)?;
    let floor = -tol.psd_clamp * b2.frobenius_norm();
    if let Some(&worst) = eig.values.iter().find(|&&e| e < floor) {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: worst });
    }
    Ok(eig.map(|e| C64::new(e.max(0.0).sqrt(), 0.0)))
}
