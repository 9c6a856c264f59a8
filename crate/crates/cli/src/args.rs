use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qgld_core::qgpe::{GradientEncoding, Shift};

use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "qgld", version, about = "Quantum gradient phase estimation and log-determinant gradients on a statevector simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue gradients of one matrix along one perturbation.
    Gradient(GradientArgs),
    /// The σx gradient table and the Hadamard example at L = 1e-6.
    #[command(name = "reproduce-table1")]
    ReproduceTable1(Table1Args),
    /// Inverse expectation value ⟨Φ|X⁻¹|Φ⟩, optionally swept over L.
    Qgld(QgldArgs),
    /// Block Lanczos trace: top Ritz value and basis orthogonality per step.
    Lanczos(LanczosArgs),
    /// Kernel ridge fit of sin(x) with classical and QGLD solves.
    KernelDemo(KernelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct EncodingArgs {
    /// Perturbation range.
    #[arg(long = "L", default_value_t = GradientEncoding::DEFAULT_L)]
    pub l: f64,
    /// Gradient scale; defaults to 1, or 2‖Δ‖₂ for gradient runs with m > 1.
    #[arg(long = "W")]
    pub w: Option<f64>,
    /// Deviation register qubits.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Use s(ε) = L(ε − M/2)/M so peak bins above M/2 read as negative.
    #[arg(long)]
    pub centered: bool,
    /// Include the 2π factor in the evolution time.
    #[arg(long = "prefactor-2pi")]
    pub prefactor_2pi: bool,
}

impl EncodingArgs {
    pub fn encoding(&self, default_w: f64) -> CliResult<GradientEncoding> {
        let shift = if self.centered { Shift::Centered } else { Shift::Unshifted };
        Ok(GradientEncoding::new(
            self.l,
            self.w.unwrap_or(default_w),
            self.m,
            shift,
            self.prefactor_2pi,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradientReadout {
    /// 2·arccos(√p₀)/κ, m = 1 only, magnitude only.
    Amplitude,
    /// m = 1 with a π/2 reference phase; keeps the sign.
    Signed,
    /// Most probable inverse-QFT bin.
    Peak,
}

#[derive(Debug, Clone, Args)]
pub struct GradientArgs {
    /// Preset (sigma-x, sigma-z, hadamard, identity[:n], diag:a,b,.., random-spd:n, ...) or matrix file.
    #[arg(long)]
    pub matrix: String,
    /// element:i,j (1-based), all-ones, outer, identity, or a matrix file.
    #[arg(long)]
    pub delta: String,
    /// State for --delta outer.
    #[arg(long)]
    pub phi: Option<String>,
    /// Run on this state only (preset or vector file); default is every eigenvector.
    #[arg(long)]
    pub state: Option<String>,
    /// Default: amplitude for m = 1, peak otherwise.
    #[arg(long, value_enum)]
    pub readout: Option<GradientReadout>,
    /// Estimate from this many sampled measurements instead of exact probabilities.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub enc: EncodingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QgldMode {
    PerEigenvector,
    Sigma,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QgldReadout {
    Signed,
    Peak,
}

#[derive(Debug, Clone, Args)]
pub struct QgldArgs {
    #[arg(long)]
    pub matrix: String,
    /// Preset (plus, minus, uniform, e<i>, random) or vector file.
    #[arg(long, default_value = "uniform")]
    pub phi: String,
    #[arg(long, value_enum, default_value_t = QgldMode::PerEigenvector)]
    pub mode: QgldMode,
    /// Eigenpairs to keep, most relevant first; default N.
    #[arg(long)]
    pub k: Option<usize>,
    /// Take eigenpairs from block Lanczos with this block size instead of the dense solver.
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample count for --mode sampled.
    #[arg(long, default_value_t = 64)]
    pub shots: usize,
    /// Skip near-zero eigenvalues instead of failing.
    #[arg(long)]
    pub pseudo_inverse: bool,
    #[arg(long, value_enum, default_value_t = QgldReadout::Signed)]
    pub readout: QgldReadout,
    /// Comma-separated L values; emits an error-vs-L table.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
    #[command(flatten)]
    pub enc: EncodingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LanczosArgs {
    #[arg(long)]
    pub matrix: String,
    #[arg(long, default_value_t = 1)]
    pub b: usize,
    /// Steps; default floor(N/b).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub lambda: f64,
    /// Eigenpairs for the QGLD solve; default all.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "L", default_value_t = GradientEncoding::DEFAULT_L)]
    pub l: f64,
    #[arg(long, default_value_t = 50)]
    pub holdout: usize,
    /// Skip the L, L/2 extrapolation of each quadratic form.
    #[arg(long)]
    pub no_extrapolation: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}
