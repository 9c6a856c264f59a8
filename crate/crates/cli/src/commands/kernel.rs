use serde::Serialize;

use qgld_core::kernel::{kernel_fit, kernel_predict, sine_holdout, sine_training_set, KernelModel, KernelSolver};
use qgld_core::qgpe::GradientEncoding;

use crate::args::KernelArgs;
use crate::error::{CliError, CliResult};
use crate::format::Cell;

pub const HEADER: [&str; 6] = ["i", "x", "target", "alpha_classical", "alpha_qgld", "abs_diff"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDemo {
    pub classical: KernelModel,
    pub qgld: KernelModel,
    pub alpha_max_abs_diff: f64,
    pub holdout_points: usize,
    pub holdout_max_error_classical: f64,
    pub holdout_max_error_qgld: f64,
    pub holdout_error_gap: f64,
}

impl KernelDemo {
    pub fn rows(&self) -> Vec<Vec<Cell>> {
        (0..self.classical.alpha.len())
            .map(|i| {
                let a = self.classical.alpha[i];
                let b = self.qgld.alpha[i];
                vec![
                    (i + 1).into(),
                    self.classical.training_points[i][0].into(),
                    self.classical.targets[i].into(),
                    a.into(),
                    b.into(),
                    (a - b).abs().into(),
                ]
            })
            .collect()
    }
}

fn holdout_error(m: &KernelModel, xs: &[f64]) -> f64 {
    xs.iter()
        .fold(0.0f64, |e, &x| e.max((kernel_predict(m, &[x]) - x.sin()).abs()))
}

pub fn kernel_demo(args: &KernelArgs) -> CliResult<KernelDemo> {
    if args.points < 2 || args.points > 64 {
        return Err(CliError::usage("--points must lie in [2, 64]"));
    }
    if args.holdout == 0 {
        return Err(CliError::usage("--holdout must be at least 1"));
    }
    let (p, f) = sine_training_set(args.points);
    let classical = kernel_fit(&p, &f, args.sigma, args.lambda, KernelSolver::Classical)?;
    let solver = KernelSolver::Qgld {
        k: args.k.unwrap_or(args.points),
        enc: GradientEncoding::canonical(args.l, 1)?,
        richardson: !args.no_extrapolation,
    };
    let qgld = kernel_fit(&p, &f, args.sigma, args.lambda, solver)?;
    let alpha_max_abs_diff = classical
        .alpha
        .iter()
        .zip(&qgld.alpha)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let xs = sine_holdout(args.holdout);
    let ec = holdout_error(&classical, &xs);
    let eq = holdout_error(&qgld, &xs);
    Ok(KernelDemo {
        classical,
        qgld,
        alpha_max_abs_diff,
        holdout_points: xs.len(),
        holdout_max_error_classical: ec,
        holdout_max_error_qgld: eq,
        holdout_error_gap: (ec - eq).abs(),
    })
}
