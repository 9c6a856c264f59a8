use serde::Serialize;

use qgld_core::instances::rng_from_seed;
use qgld_core::numeric::{dot, eig_hermitian, ComplexMatrix, C64};
use qgld_core::qgpe::{
    extract_gradient_peak, qgpe_run, qgpe_signed, suggest_w, GradientEncoding, PerturbationDirection,
};
use qgld_core::statevector::sample_distribution;

use crate::args::{GradientArgs, GradientReadout};
use crate::error::{CliError, CliResult};
use crate::format::Cell;
use crate::inputs::{load_delta, load_matrix, load_state};
use crate::pool::map_ordered;

pub const HEADER: [&str; 8] = [
    "p",
    "E_p",
    "delta_kind",
    "L",
    "m",
    "gradient_quantum",
    "gradient_oracle",
    "abs_error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientRow {
    /// 1-based position in ascending eigenvalue order.
    pub p: usize,
    #[serde(rename = "E_p")]
    pub e_p: f64,
    pub delta_kind: String,
    #[serde(rename = "L")]
    pub l: f64,
    pub m: u32,
    pub gradient_quantum: f64,
    pub gradient_oracle: f64,
    pub abs_error: f64,
}

impl GradientRow {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.p.into(),
            self.e_p.into(),
            self.delta_kind.as_str().into(),
            self.l.into(),
            (self.m as usize).into(),
            self.gradient_quantum.into(),
            self.gradient_oracle.into(),
            self.abs_error.into(),
        ]
    }
}

fn sampled(dist: Vec<f64>, shots: Option<u64>, seed: u64) -> CliResult<Vec<f64>> {
    match shots {
        None => Ok(dist),
        Some(s) => {
            let hist = sample_distribution(&dist, seed, s)?;
            Ok(hist.iter().map(|&c| c as f64 / s as f64).collect())
        }
    }
}

/// One gradient readout on state `v`.
pub fn quantum_gradient(
    x: &ComplexMatrix,
    v: &[C64],
    delta: &PerturbationDirection,
    enc: &GradientEncoding,
    readout: GradientReadout,
    shots: Option<u64>,
    seed: u64,
) -> CliResult<f64> {
    match readout {
        GradientReadout::Signed => {
            if shots.is_some() {
                return Err(CliError::usage("--shots is not supported with --readout signed"));
            }
            Ok(qgpe_signed(x, v, delta, enc)?.gradient)
        }
        GradientReadout::Amplitude => {
            if enc.m() != 1 {
                return Err(CliError::usage("--readout amplitude needs --m 1"));
            }
            let dist = sampled(qgpe_run(x, v, delta, enc)?.distribution, shots, seed)?;
            Ok(enc.amplitude_gradient(dist[0], dist[1])?)
        }
        GradientReadout::Peak => {
            let dist = sampled(qgpe_run(x, v, delta, enc)?.distribution, shots, seed)?;
            Ok(extract_gradient_peak(&dist, enc)?)
        }
    }
}

pub fn gradient_rows(args: &GradientArgs) -> CliResult<Vec<GradientRow>> {
    let mut rng = rng_from_seed(args.seed);
    let x = load_matrix(&args.matrix, &mut rng)?;
    if !x.is_square() {
        return Err(CliError::usage(format!("matrix must be square, got {}x{}", x.rows(), x.cols())));
    }
    let n = x.rows();
    let phi = args.phi.as_deref().map(|s| load_state(s, n, &mut rng)).transpose()?;
    let delta = load_delta(&args.delta, n, phi.as_deref())?;
    let default_w = if args.enc.m > 1 { suggest_w(&delta) } else { 1.0 };
    let enc = args.enc.encoding(default_w)?;
    let readout = args.readout.unwrap_or(if enc.m() == 1 {
        GradientReadout::Amplitude
    } else {
        GradientReadout::Peak
    });

    let eig = eig_hermitian(&x)?;
    let states: Vec<(usize, Vec<C64>)> = match &args.state {
        Some(spec) => {
            let v = load_state(spec, n, &mut rng)?;
            let p = (0..n)
                .max_by(|&a, &b| {
                    dot(&eig.vector(a), &v)
                        .norm_sqr()
                        .total_cmp(&dot(&eig.vector(b), &v).norm_sqr())
                })
                .expect("matrix is non-empty");
            vec![(p + 1, v)]
        }
        None => (0..n).map(|p| (p + 1, eig.vector(p))).collect(),
    };
    map_ordered(&states, |(p, v)| {
        let e_p = dot(v, &x.matvec(v)).re;
        let oracle = dot(v, &delta.matrix().matvec(v)).re;
        let g = quantum_gradient(&x, v, &delta, &enc, readout, args.shots, args.seed.wrapping_add(*p as u64))?;
        Ok(GradientRow {
            p: *p,
            e_p,
            delta_kind: delta.kind().label(),
            l: enc.l(),
            m: enc.m(),
            gradient_quantum: g,
            gradient_oracle: oracle,
            abs_error: (g - oracle).abs(),
        })
    })
}
