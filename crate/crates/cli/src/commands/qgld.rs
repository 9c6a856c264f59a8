use serde::Serialize;

use qgld_core::instances::rng_from_seed;
use qgld_core::numeric::{ComplexMatrix, C64};
use qgld_core::qgld::{
    classical_reference_expectation, qgld_expectation, sampled_qgld, sigma_qgld_readout, EigenSource,
    InverseExpectationReport, InverseExpectationRequest, Readout, SampledEstimate,
};
use qgld_core::qgpe::GradientEncoding;

use crate::args::{QgldArgs, QgldMode, QgldReadout};
use crate::error::{CliError, CliResult};
use crate::format::Cell;
use crate::inputs::{load_matrix, load_state};
use crate::pool::map_ordered;

pub const SWEEP_HEADER: [&str; 4] = ["L", "total", "classical_reference", "abs_error"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaReport {
    pub total: f64,
    pub p0: f64,
    pub w_effective: f64,
    pub dim: usize,
    pub classical_reference: f64,
    pub encoding: GradientEncoding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledReport {
    /// Mean over samples.
    pub total: f64,
    pub spread: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
    pub classical_reference: f64,
    pub encoding: GradientEncoding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum QgldOutput {
    PerEigenvector(InverseExpectationReport),
    Sigma(SigmaReport),
    Sampled(SampledReport),
}

impl QgldOutput {
    pub fn total(&self) -> f64 {
        match self {
            Self::PerEigenvector(r) => r.total,
            Self::Sigma(r) => r.total,
            Self::Sampled(r) => r.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub total: f64,
    pub classical_reference: f64,
    pub abs_error: f64,
}

impl SweepRow {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.l.into(),
            self.total.into(),
            self.classical_reference.into(),
            self.abs_error.into(),
        ]
    }
}

struct Problem {
    x: ComplexMatrix,
    phi: Vec<C64>,
}

fn load(args: &QgldArgs) -> CliResult<Problem> {
    let mut rng = rng_from_seed(args.seed);
    let x = load_matrix(&args.matrix, &mut rng)?;
    if !x.is_square() {
        return Err(CliError::usage(format!("matrix must be square, got {}x{}", x.rows(), x.cols())));
    }
    let phi = load_state(&args.phi, x.rows(), &mut rng)?;
    Ok(Problem { x, phi })
}

fn run_one(args: &QgldArgs, p: &Problem, enc: GradientEncoding) -> CliResult<QgldOutput> {
    let n = p.x.rows();
    match args.mode {
        QgldMode::PerEigenvector => {
            let mut req = InverseExpectationRequest::new(p.x.clone(), p.phi.clone(), args.k.unwrap_or(n), enc)?;
            if let Some(b) = args.b {
                req.eigensource = EigenSource::Rqbl { b, seed: args.seed };
            }
            req.readout = match args.readout {
                QgldReadout::Signed => Readout::Signed,
                QgldReadout::Peak => Readout::Peak,
            };
            req.pseudo_inverse = args.pseudo_inverse;
            Ok(QgldOutput::PerEigenvector(qgld_expectation(&req)?))
        }
        QgldMode::Sigma => {
            let r = sigma_qgld_readout(&p.x, &p.phi, &enc)?;
            Ok(QgldOutput::Sigma(SigmaReport {
                total: r.total,
                p0: r.p0,
                w_effective: r.w_effective,
                dim: r.dim,
                classical_reference: classical_reference_expectation(&p.x, &p.phi)?,
                encoding: enc,
            }))
        }
        QgldMode::Sampled => {
            let SampledEstimate {
                estimate,
                spread,
                samples,
                seed,
            } = sampled_qgld(&p.x, &p.phi, args.shots, args.seed, &enc)?;
            Ok(QgldOutput::Sampled(SampledReport {
                total: estimate,
                spread,
                samples,
                seed,
                classical_reference: classical_reference_expectation(&p.x, &p.phi)?,
                encoding: enc,
            }))
        }
    }
}

fn check_mode_flags(args: &QgldArgs) -> CliResult<()> {
    if args.mode != QgldMode::PerEigenvector && (args.k.is_some() || args.b.is_some() || args.pseudo_inverse) {
        return Err(CliError::usage("--k, --b and --pseudo-inverse apply to --mode per-eigenvector only"));
    }
    Ok(())
}

pub fn qgld_report(args: &QgldArgs) -> CliResult<QgldOutput> {
    check_mode_flags(args)?;
    let p = load(args)?;
    run_one(args, &p, args.enc.encoding(1.0)?)
}

pub fn qgld_sweep(args: &QgldArgs, ls: &[f64]) -> CliResult<Vec<SweepRow>> {
    check_mode_flags(args)?;
    if ls.is_empty() {
        return Err(CliError::usage("--sweep needs at least one L"));
    }
    let p = load(args)?;
    let reference = classical_reference_expectation(&p.x, &p.phi)?;
    let base = args.enc.encoding(1.0)?;
    map_ordered(ls, |&l| {
        let total = run_one(args, &p, base.with_l(l)?)?.total();
        Ok(SweepRow {
            l,
            total,
            classical_reference: reference,
            abs_error: (total - reference).abs(),
        })
    })
}
