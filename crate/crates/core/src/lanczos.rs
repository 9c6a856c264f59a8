//! Randomized block Lanczos with full reorthogonalization, run as dense
//! classical linear algebra.
//!
//! Recursion: Ψ_{p+1}·B_{p+1} = X·Ψ_p − Ψ_p·A_p − Ψ_{p−1}·B_p†, with
//! A_p = Ψ_p†XΨ_p and B_{p+1} = (R†R)^{1/2}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{gaussian_matrix, rng_from_seed};
use crate::numeric::io::MatrixFile;
use crate::numeric::{
    eig_hermitian, orthonormalize_svd, psd_sqrt, singular_values, ComplexMatrix, OrthonormalBlock, Tolerances, C64,
};

/// Smallest singular value of R, relative to ‖X‖_F, that still counts as a new direction.
pub const BREAKDOWN_TOL: f64 = 1e-10;
/// Eigenvalues of B below this fraction of the largest are dropped when inverting it.
const PINV_TOL: f64 = 1e-12;

/// Random N×b starting block: Gaussian entries, replaced by the UV† factor of their SVD.
pub fn rqbl_init(n: usize, b: usize, seed: u64) -> Result<OrthonormalBlock> {
    if b == 0 || b > n {
        return Err(Error::InvalidArgument(format!("block size must satisfy 1 <= b <= N, got b={b}, N={n}")));
    }
    let mut rng = rng_from_seed(seed);
    loop {
        if let Ok(block) = orthonormalize_svd(&gaussian_matrix(n, b, true, &mut rng)) {
            return Ok(block);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RqblStep {
    Continue {
        a: ComplexMatrix,
        b_next: ComplexMatrix,
        psi_next: OrthonormalBlock,
    },
    /// The residual has (numerically) left no new direction: the basis spans an
    /// invariant subspace. Not a failure.
    Breakdown { a: ComplexMatrix, smallest_singular: f64 },
}

/// R ← R − Q(Q†R) against every previous block, twice.
fn project_out(r: &mut ComplexMatrix, previous: &[OrthonormalBlock]) {
    for _ in 0..2 {
        for q in previous {
            let q = q.matrix();
            let coeff = q.adjoint().matmul(r);
            *r = &*r - &q.matmul(&coeff);
        }
    }
}

/// Hermitian pseudo-inverse of a positive-semidefinite B.
fn psd_pinv(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(b)?;
    let top = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(eig.map(|e| if e > PINV_TOL * top { C64::new(1.0 / e, 0.0) } else { C64::new(0.0, 0.0) }))
}

/// One recursion step. `basis` holds Ψ_0..Ψ_p (Ψ_p last); `b_p` is B_p
/// (absent at p = 0).
pub fn rqbl_step(x: &ComplexMatrix, basis: &[OrthonormalBlock], b_p: Option<&ComplexMatrix>) -> Result<RqblStep> {
    let psi = basis
        .last()
        .ok_or_else(|| Error::InvalidArgument("rqbl_step needs at least one basis block".into()))?
        .matrix();
    if psi.rows() != x.rows() || !x.is_square() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: psi.rows(),
        });
    }
    let xpsi = x.matmul(psi);
    let a = psi.adjoint().matmul(&xpsi);
    let a = ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let mut r = &xpsi - &psi.matmul(&a);
    if let (Some(b_p), Some(prev)) = (b_p, basis.len().checked_sub(2).map(|i| &basis[i])) {
        r = &r - &prev.matrix().matmul(&b_p.adjoint());
    }
    project_out(&mut r, basis);

    let scale = x.frobenius_norm();
    let sigma = singular_values(&r);
    let smallest = sigma.last().copied().unwrap_or(0.0);
    let n_used: usize = basis.iter().map(|q| q.cols()).sum();
    if smallest < BREAKDOWN_TOL * scale || n_used + psi.cols() > x.rows() {
        return Ok(RqblStep::Breakdown {
            a,
            smallest_singular: smallest,
        });
    }
    let b_next = psd_sqrt(&r.adjoint().matmul(&r))?;
    let mut next = r.matmul(&psd_pinv(&b_next)?);
    // Clean up what roundoff left in the new block.
    project_out(&mut next, basis);
    let psi_next = orthonormalize_svd(&next)?;
    Ok(RqblStep::Continue { a, b_next, psi_next })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanczosFactorization {
    pub block_size: usize,
    #[serde(with = "matrix_list")]
    pub a_blocks: Vec<ComplexMatrix>,
    /// B_1..B_{k−1}; B_{p+1} couples Ψ_p and Ψ_{p+1}.
    #[serde(with = "matrix_list")]
    pub b_blocks: Vec<ComplexMatrix>,
    pub basis_blocks: Vec<OrthonormalBlock>,
    /// ‖Q†Q − I‖_max of the accumulated basis after each step.
    pub orthogonality_log: Vec<f64>,
    pub breakdown: bool,
}

mod matrix_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(list: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        let files: Vec<MatrixFile> = list.iter().map(MatrixFile::from).collect();
        files.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        let files = Vec::<MatrixFile>::deserialize(d)?;
        files
            .into_iter()
            .map(|f| f.into_matrix().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl LanczosFactorization {
    pub fn steps(&self) -> usize {
        self.a_blocks.len()
    }

    /// All basis columns side by side, N × (k·b).
    pub fn basis_matrix(&self) -> ComplexMatrix {
        let blocks: Vec<&ComplexMatrix> = self.basis_blocks.iter().map(|b| b.matrix()).collect();
        ComplexMatrix::hstack(&blocks).expect("basis blocks share a row count")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("factorization serialization is infallible")
    }

    /// The factorization as it stood after `steps` steps.
    pub fn truncated(&self, steps: usize) -> Self {
        let s = steps.clamp(1, self.steps());
        Self {
            block_size: self.block_size,
            a_blocks: self.a_blocks[..s].to_vec(),
            b_blocks: self.b_blocks[..s - 1].to_vec(),
            basis_blocks: self.basis_blocks[..s].to_vec(),
            orthogonality_log: self.orthogonality_log[..s.min(self.orthogonality_log.len())].to_vec(),
            breakdown: self.breakdown && s == self.steps(),
        }
    }
}

fn orthogonality_defect(blocks: &[OrthonormalBlock]) -> f64 {
    let refs: Vec<&ComplexMatrix> = blocks.iter().map(|b| b.matrix()).collect();
    let q = ComplexMatrix::hstack(&refs).expect("basis blocks share a row count");
    let g = q.adjoint().matmul(&q);
    (&g - &ComplexMatrix::identity(g.rows())).max_abs()
}

/// Runs up to `k` recursion steps from Ψ_0, stopping early on breakdown.
pub fn factorize(x: &ComplexMatrix, psi0: OrthonormalBlock, k: usize) -> Result<LanczosFactorization> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    x.check_hermitian(Tolerances::default().hermitian)?;
    let b = psi0.cols();
    let mut f = LanczosFactorization {
        block_size: b,
        a_blocks: Vec::new(),
        b_blocks: Vec::new(),
        basis_blocks: vec![psi0],
        orthogonality_log: Vec::new(),
        breakdown: false,
    };
    f.orthogonality_log.push(orthogonality_defect(&f.basis_blocks));
    loop {
        let step = rqbl_step(x, &f.basis_blocks, f.b_blocks.last())?;
        match step {
            RqblStep::Breakdown { a, .. } => {
                f.a_blocks.push(a);
                f.breakdown = true;
                break;
            }
            RqblStep::Continue { a, b_next, psi_next } => {
                f.a_blocks.push(a);
                if f.a_blocks.len() == k {
                    break;
                }
                f.b_blocks.push(b_next);
                f.basis_blocks.push(psi_next);
                f.orthogonality_log.push(orthogonality_defect(&f.basis_blocks));
            }
        }
    }
    Ok(f)
}

/// The (k·b)×(k·b) block-tridiagonal projection S = Q†XQ.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal {
    matrix: ComplexMatrix,
    block_size: usize,
}

impl BlockTridiagonal {
    pub fn assemble(f: &LanczosFactorization) -> Self {
        let b = f.block_size;
        let size = f.a_blocks.len() * b;
        let mut s = ComplexMatrix::zeros(size, size);
        for (p, a) in f.a_blocks.iter().enumerate() {
            for i in 0..b {
                for j in 0..b {
                    s[(p * b + i, p * b + j)] = a[(i, j)];
                }
            }
        }
        for (p, bb) in f.b_blocks.iter().enumerate() {
            // row block p+1, column block p
            for i in 0..b {
                for j in 0..b {
                    s[((p + 1) * b + i, p * b + j)] = bb[(i, j)];
                    s[(p * b + j, (p + 1) * b + i)] = bb[(i, j)].conj();
                }
            }
        }
        Self { matrix: s, block_size: b }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RitzSolution {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
}

impl RitzSolution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// "Most relevant first": |λ| descending, ties broken by λ descending.
pub fn relevance_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    order
}

/// Diagonalizes S, lifts the eigenvectors through the basis and measures
/// ‖Xv − λv‖₂ for each pair. Pairs are returned in ascending order of λ.
pub fn assemble_and_solve(x: &ComplexMatrix, f: &LanczosFactorization) -> Result<RitzSolution> {
    let s = BlockTridiagonal::assemble(f);
    let eig = eig_hermitian(s.matrix())?;
    let q = f.basis_matrix();
    let mut vectors = Vec::with_capacity(eig.len());
    let mut residuals = Vec::with_capacity(eig.len());
    for (p, &lambda) in eig.values.iter().enumerate() {
        let v = crate::numeric::normalized(&q.matvec(&eig.vector(p)));
        let xv = x.matvec(&v);
        let r: f64 = xv.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
        vectors.push(v);
        residuals.push(r);
    }
    Ok(RitzSolution {
        values: eig.values,
        vectors,
        residuals,
    })
}

/// Full pipeline: seeded start block, up to k steps, Ritz pairs sorted by
/// relevance (|λ| descending, +λ before −λ on ties).
pub fn run_rqbl(x: &ComplexMatrix, b: usize, k: usize, seed: u64) -> Result<RitzSolution> {
    let (sol, _) = run_rqbl_with_factorization(x, b, k, seed)?;
    Ok(sol)
}

pub fn run_rqbl_with_factorization(
    x: &ComplexMatrix,
    b: usize,
    k: usize,
    seed: u64,
) -> Result<(RitzSolution, LanczosFactorization)> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: x.cols(),
        });
    }
    if k == 0 || k * b > x.rows() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k and k*b <= N, got k={k}, b={b}, N={}",
            x.rows()
        )));
    }
    let psi0 = rqbl_init(x.rows(), b, seed)?;
    let f = factorize(x, psi0, k)?;
    let sol = assemble_and_solve(x, &f)?;
    let order = relevance_order(&sol.values);
    let sorted = RitzSolution {
        values: order.iter().map(|&i| sol.values[i]).collect(),
        vectors: order.iter().map(|&i| sol.vectors[i].clone()).collect(),
        residuals: order.iter().map(|&i| sol.residuals[i]).collect(),
    };
    Ok((sorted, f))
}
