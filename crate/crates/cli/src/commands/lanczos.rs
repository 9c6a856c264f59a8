use serde::Serialize;

use qgld_core::instances::rng_from_seed;
use qgld_core::lanczos::{assemble_and_solve, relevance_order, run_rqbl_with_factorization, LanczosFactorization};
use qgld_core::numeric::eig_hermitian;

use crate::args::LanczosArgs;
use crate::error::{CliError, CliResult};
use crate::format::Cell;
use crate::inputs::load_matrix;
use crate::pool::map_ordered;

pub const HEADER: [&str; 7] = [
    "step",
    "subspace_dim",
    "top_ritz",
    "top_dense",
    "abs_error",
    "top_residual",
    "orthogonality",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanczosRow {
    pub step: usize,
    pub subspace_dim: usize,
    pub top_ritz: f64,
    pub top_dense: f64,
    pub abs_error: f64,
    pub top_residual: f64,
    /// ‖Q†Q − I‖_max of the basis after this step.
    pub orthogonality: f64,
}

impl LanczosRow {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.step.into(),
            self.subspace_dim.into(),
            self.top_ritz.into(),
            self.top_dense.into(),
            self.abs_error.into(),
            self.top_residual.into(),
            self.orthogonality.into(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanczosTrace {
    pub rows: Vec<LanczosRow>,
    pub ritz_values: Vec<f64>,
    pub ritz_residuals: Vec<f64>,
    pub factorization: LanczosFactorization,
}

pub fn lanczos_trace(args: &LanczosArgs) -> CliResult<LanczosTrace> {
    let x = load_matrix(&args.matrix, &mut rng_from_seed(args.seed))?;
    if !x.is_square() {
        return Err(CliError::usage(format!("matrix must be square, got {}x{}", x.rows(), x.cols())));
    }
    if args.b == 0 || args.b > x.rows() {
        return Err(CliError::usage(format!("--b must lie in [1, {}]", x.rows())));
    }
    let k = args.k.unwrap_or(x.rows() / args.b);
    let dense = eig_hermitian(&x)?;
    let top_dense = dense.values[relevance_order(&dense.values)[0]];
    let (sol, f) = run_rqbl_with_factorization(&x, args.b, k, args.seed)?;
    let steps: Vec<usize> = (1..=f.steps()).collect();
    let rows = map_ordered(&steps, |&s| {
        let part = f.truncated(s);
        let ritz = assemble_and_solve(&x, &part)?;
        let top = relevance_order(&ritz.values)[0];
        Ok(LanczosRow {
            step: s,
            subspace_dim: ritz.values.len(),
            top_ritz: ritz.values[top],
            top_dense,
            abs_error: (ritz.values[top] - top_dense).abs(),
            top_residual: ritz.residuals[top],
            orthogonality: part.orthogonality_log.last().copied().unwrap_or(0.0),
        })
    })?;
    Ok(LanczosTrace {
        rows,
        ritz_values: sol.values,
        ritz_residuals: sol.residuals,
        factorization: f,
    })
}
