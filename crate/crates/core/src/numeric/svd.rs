use serde::{Deserialize, Serialize};

use super::eigen::jacobi_rotation;
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// N×b block whose columns are orthonormal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "super::io::MatrixFile", try_from = "super::io::MatrixFile")]
pub struct OrthonormalBlock(ComplexMatrix);

impl OrthonormalBlock {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    /// ‖Ψ†Ψ − I‖_max
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.0.adjoint().matmul(&self.0);
        (&g - &ComplexMatrix::identity(g.rows())).max_abs()
    }
}

impl From<OrthonormalBlock> for super::io::MatrixFile {
    fn from(b: OrthonormalBlock) -> Self {
        super::io::MatrixFile::from(&b.0)
    }
}

impl TryFrom<super::io::MatrixFile> for OrthonormalBlock {
    type Error = Error;
    fn try_from(f: super::io::MatrixFile) -> Result<Self> {
        orthonormalize_svd(&f.into_matrix()?)
    }
}

/// One-sided Jacobi SVD. Returns (W, V) with W = A·V having mutually
/// orthogonal columns, so that the singular values are the column norms of W.
fn one_sided_jacobi(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (rows, cols) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(cols);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..rows {
                    let (x, y) = (w[(k, i)], w[(k, j)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == ZERO {
                    continue;
                }
                rotated = true;
                let (gii, gij, gji, gjj) = jacobi_rotation(alpha, beta, gamma);
                for k in 0..rows {
                    let (x, y) = (w[(k, i)], w[(k, j)]);
                    w[(k, i)] = x * gii + y * gji;
                    w[(k, j)] = x * gij + y * gjj;
                }
                for k in 0..cols {
                    let (x, y) = (v[(k, i)], v[(k, j)]);
                    v[(k, i)] = x * gii + y * gji;
                    v[(k, j)] = x * gij + y * gjj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Singular values of an N×b block (b ≤ N), in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (w, _) = one_sided_jacobi(a);
    let mut s: Vec<f64> = (0..w.cols())
        .map(|j| w.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn orthonormalize_svd(block: &ComplexMatrix) -> Result<OrthonormalBlock> {
    orthonormalize_svd_with(block, &Tolerances::default())
}

/// Replaces a full-rank N×b block by the factor U·V† of its SVD.
pub fn orthonormalize_svd_with(block: &ComplexMatrix, tol: &Tolerances) -> Result<OrthonormalBlock> {
    if block.cols() > block.rows() || block.cols() == 0 {
        return Err(Error::DimensionMismatch {
            expected: block.rows(),
            found: block.cols(),
        });
    }
    let (w, v) = one_sided_jacobi(block);
    let sigma: Vec<f64> = (0..w.cols())
        .map(|j| w.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let max = sigma.iter().cloned().fold(0.0, f64::max);
    let min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= tol.rank * max {
        return Err(Error::RankDeficientBlock {
            ratio: if max == 0.0 { 0.0 } else { min / max },
        });
    }
    let mut u = w;
    for j in 0..u.cols() {
        let inv = C64::new(1.0 / sigma[j], 0.0);
        for i in 0..u.rows() {
            u[(i, j)] *= inv;
        }
    }
    Ok(OrthonormalBlock(u.matmul(&v.adjoint())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gaussian_matrix, rng_from_seed};
    use crate::numeric::dot;

    /// Classical Gram–Schmidt, the independent route for span comparisons.
    fn gram_schmidt(a: &ComplexMatrix) -> ComplexMatrix {
        let mut cols: Vec<Vec<C64>> = Vec::new();
        for j in 0..a.cols() {
            let mut v = a.column(j);
            for q in &cols {
                let c = dot(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
            let n = crate::numeric::norm(&v);
            cols.push(v.iter().map(|z| z / n).collect());
        }
        ComplexMatrix::from_columns(&cols).unwrap()
    }

    fn projector(q: &ComplexMatrix) -> ComplexMatrix {
        q.matmul(&q.adjoint())
    }

    #[test]
    fn orthonormal_block_is_fixed_point() {
        let id = ComplexMatrix::identity(5).columns(0, 3);
        let out = orthonormalize_svd(&id).unwrap();
        assert!((out.matrix() - &id).max_abs() < 1e-12);
    }

    #[test]
    fn single_column_is_normalized() {
        let v = ComplexMatrix::from_vec(3, 1, vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0), ZERO]).unwrap();
        let out = orthonormalize_svd(&v).unwrap();
        let want = v.scale_real(0.2);
        assert!((out.matrix() - &want).max_abs() < 1e-15);
    }

    #[test]
    fn random_block_span_matches_gram_schmidt() {
        let mut rng = rng_from_seed(21);
        let a = gaussian_matrix(8, 2, true, &mut rng);
        let q = orthonormalize_svd(&a).unwrap();
        assert!(q.orthonormality_defect() < 1e-12);
        let diff = (&projector(q.matrix()) - &projector(&gram_schmidt(&a))).max_abs();
        assert!(diff < 1e-12, "projector mismatch {diff}");
    }

    #[test]
    fn polar_factor_is_closest_orthonormal_block() {
        // for A = U Σ V†, U V† = A (A†A)^{-1/2}
        let mut rng = rng_from_seed(4);
        let a = gaussian_matrix(6, 3, true, &mut rng);
        let q = orthonormalize_svd(&a).unwrap();
        let inv_sqrt = crate::numeric::eig_hermitian(&a.adjoint().matmul(&a))
            .unwrap()
            .map(|e| C64::new(1.0 / e.sqrt(), 0.0));
        let oracle = a.matmul(&inv_sqrt);
        assert!((q.matrix() - &oracle).max_abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_block_is_rejected() {
        let col = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0)];
        let a = ComplexMatrix::from_columns(&[col.clone(), col]).unwrap();
        assert!(matches!(orthonormalize_svd(&a), Err(Error::RankDeficientBlock { .. })));
    }

    #[test]
    fn singular_values_of_diagonal_block() {
        let a = ComplexMatrix::diag(&[3.0, -5.0, 1.0]);
        let s = singular_values(&a);
        assert!((s[0] - 5.0).abs() < 1e-15 && (s[1] - 3.0).abs() < 1e-15 && (s[2] - 1.0).abs() < 1e-15);
    }
}
