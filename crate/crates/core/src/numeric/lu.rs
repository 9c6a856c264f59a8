use std::f64::consts::PI;

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::Tolerances;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl LuDecomposition {
    pub fn new(a: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.dim();
        let threshold = tol.pivot * a.frobenius_norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (piv_row, piv_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs <= threshold || piv_abs == 0.0 {
                return Err(Error::SingularMatrix {
                    step: k,
                    pivot: piv_abs,
                    threshold,
                });
            }
            if piv_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv_row, j)];
                    lu[(piv_row, j)] = tmp;
                }
                perm.swap(k, piv_row);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm, swaps })
    }

    /// ln det A on the principal branch: ln|det A| + i·arg(det A), arg ∈ (−π, π].
    pub fn logdet(&self) -> C64 {
        let n = self.lu.dim();
        let mut log_abs = 0.0;
        let mut phase = if self.swaps % 2 == 1 { -ONE } else { ONE };
        for i in 0..n {
            let u = self.lu[(i, i)];
            log_abs += u.norm().ln();
            phase *= u / u.norm();
        }
        let mut arg = phase.arg();
        if arg <= -PI {
            arg = PI;
        }
        C64::new(log_abs, arg)
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.dim();
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = ONE;
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }
}

pub fn logdet_lu(a: &ComplexMatrix) -> Result<C64> {
    logdet_lu_with(a, &Tolerances::default())
}

pub fn logdet_lu_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<C64> {
    Ok(LuDecomposition::new(a, tol)?.logdet())
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    inverse_with(a, &Tolerances::default())
}

pub fn inverse_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(LuDecomposition::new(a, tol)?.inverse())
}
