//! Gradient phase estimation: perturbation directions, the controlled
//! evolution family U(ε) = exp(i·t·(X + s(ε)Δ)), the circuit itself, and the
//! readouts that turn deviation-register statistics into eigenvalue gradients.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, eig_hermitian, norm, unitary_phase_exp, ComplexMatrix, Tolerances, C64, ZERO};
use crate::statevector::{RegisterLayout, StateVector};

/// Which entries of X a direction perturbs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DeltaKind {
    /// 1 at (i, j) and (j, i); 0-based indices.
    Element { i: usize, j: usize },
    AllOnes,
    /// |Φ⟩⟨Φ|, so that tr(YΔ) = ⟨Φ|Y|Φ⟩.
    Outer { phi: Vec<C64> },
    Custom,
}

impl DeltaKind {
    /// Short label used in CSV output (indices printed 1-based).
    pub fn label(&self) -> String {
        match self {
            DeltaKind::Element { i, j } => format!("element:{},{}", i + 1, j + 1),
            DeltaKind::AllOnes => "all-ones".into(),
            DeltaKind::Outer { .. } => "outer".into(),
            DeltaKind::Custom => "custom".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationDirection {
    kind: DeltaKind,
    matrix: ComplexMatrix,
}

impl PerturbationDirection {
    /// Wraps an arbitrary hermitian matrix.
    pub fn custom(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        matrix.check_hermitian(Tolerances::default().hermitian)?;
        Ok(Self {
            kind: DeltaKind::Custom,
            matrix,
        })
    }

    pub fn kind(&self) -> &DeltaKind {
        &self.kind
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Spectral norm ‖Δ‖₂.
    pub fn spectral_norm(&self) -> f64 {
        eig_hermitian(&self.matrix)
            .map(|e| e.values.iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .unwrap_or_else(|_| self.matrix.frobenius_norm())
    }
}

pub fn build_delta(kind: DeltaKind, n: usize) -> Result<PerturbationDirection> {
    let matrix = match &kind {
        DeltaKind::Element { i, j } => {
            for &idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, size: n });
                }
            }
            let mut d = ComplexMatrix::zeros(n, n);
            d[(*i, *j)] = C64::new(1.0, 0.0);
            d[(*j, *i)] = C64::new(1.0, 0.0);
            d
        }
        DeltaKind::AllOnes => ComplexMatrix::from_fn(n, n, |_, _| C64::new(1.0, 0.0)),
        DeltaKind::Outer { phi } => {
            if phi.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: phi.len() });
            }
            let nrm = norm(phi);
            if (nrm - 1.0).abs() > 1e-10 {
                return Err(Error::UnnormalizedPhi { norm: nrm });
            }
            let mut d = ComplexMatrix::outer(phi, phi);
            for i in 0..n {
                d[(i, i)] = C64::new(d[(i, i)].re, 0.0);
            }
            d
        }
        DeltaKind::Custom => {
            return Err(Error::InvalidArgument(
                "custom directions are built with PerturbationDirection::custom".into(),
            ))
        }
    };
    Ok(PerturbationDirection { kind, matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shift {
    /// s(ε) = L·ε/M
    Unshifted,
    /// s(ε) = (L/M)(ε − M/2); peaks above M/2 read as negative.
    Centered,
}

/// The (L, W, m) convention that maps eigenvalue gradients onto register phases.
///
/// The canonical choice is unshifted with no 2π prefactor, where the phase
/// picked up per unit ε is exactly ∇λ/W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientEncoding {
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "W")]
    w: f64,
    m: u32,
    shift: Shift,
    prefactor_2pi: bool,
}

impl GradientEncoding {
    pub const MAX_L: f64 = 1e-2;
    pub const MAX_M: u32 = 12;
    pub const DEFAULT_L: f64 = 1e-6;

    pub fn new(l: f64, w: f64, m: u32, shift: Shift, prefactor_2pi: bool) -> Result<Self> {
        if !(l > 0.0 && l <= Self::MAX_L) {
            return Err(Error::InvalidEncoding(format!("L must lie in (0, {}], got {l}", Self::MAX_L)));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidEncoding(format!("W must be positive and finite, got {w}")));
        }
        if !(1..=Self::MAX_M).contains(&m) {
            return Err(Error::InvalidEncoding(format!("m must lie in [1, {}], got {m}", Self::MAX_M)));
        }
        Ok(Self {
            l,
            w,
            m,
            shift,
            prefactor_2pi,
        })
    }

    /// Unshifted, no 2π, W = 1.
    pub fn canonical(l: f64, m: u32) -> Result<Self> {
        Self::new(l, 1.0, m, Shift::Unshifted, false)
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn shift(&self) -> Shift {
        self.shift
    }

    pub fn prefactor_2pi(&self) -> bool {
        self.prefactor_2pi
    }

    pub fn with_l(self, l: f64) -> Result<Self> {
        Self::new(l, self.w, self.m, self.shift, self.prefactor_2pi)
    }

    pub fn with_w(self, w: f64) -> Result<Self> {
        Self::new(self.l, w, self.m, self.shift, self.prefactor_2pi)
    }

    pub fn with_m(self, m: u32) -> Result<Self> {
        Self::new(self.l, self.w, m, self.shift, self.prefactor_2pi)
    }

    pub fn deviation_dim(&self) -> usize {
        1 << self.m
    }

    /// Evolution time t = (2π)·M/(W·L).
    pub fn time(&self) -> f64 {
        let base = self.deviation_dim() as f64 / (self.w * self.l);
        if self.prefactor_2pi {
            2.0 * PI * base
        } else {
            base
        }
    }

    /// Perturbation strength s(ε).
    pub fn strength(&self, eps: usize) -> f64 {
        let m_dim = self.deviation_dim() as f64;
        match self.shift {
            Shift::Unshifted => self.l * eps as f64 / m_dim,
            Shift::Centered => self.l / m_dim * (eps as f64 - m_dim / 2.0),
        }
    }

    /// Register phase per unit ε per unit gradient: t·L/M, i.e. 1/W or 2π/W.
    pub fn phase_per_step(&self) -> f64 {
        if self.prefactor_2pi {
            2.0 * PI / self.w
        } else {
            1.0 / self.w
        }
    }

    /// Gradient represented by one bin of the inverse QFT, 2π/(M·κ).
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / (self.deviation_dim() as f64 * self.phase_per_step())
    }

    /// Gradient read from the m = 1 amplitudes, 2·arccos(√p₀)/κ.
    pub fn amplitude_gradient(&self, p0: f64, p1: f64) -> Result<f64> {
        Ok(extract_gradient_m1(p0, p1, 1.0)? / self.phase_per_step())
    }

    /// Gradient for a measured bin j, with j > M/2 read as j − M when centered.
    pub fn bin_gradient(&self, j: usize) -> f64 {
        let m_dim = self.deviation_dim();
        let signed = match self.shift {
            Shift::Centered if j > m_dim / 2 => j as f64 - m_dim as f64,
            _ => j as f64,
        };
        signed * self.bin_width()
    }
}

/// A W that keeps |∇λ|/W ≤ 1/2, well inside the alias-free range.
///
/// Only Δ enters because every eigenvalue derivative along Δ is bounded by ‖Δ‖₂.
pub fn suggest_w(delta: &PerturbationDirection) -> f64 {
    let bound = 2.0 * delta.spectral_norm();
    if bound > 0.0 {
        bound
    } else {
        1.0
    }
}

fn check_operator(x: &ComplexMatrix, delta: &PerturbationDirection) -> Result<()> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: x.cols(),
        });
    }
    if delta.dim() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: delta.dim(),
        });
    }
    x.check_hermitian(Tolerances::default().hermitian)
}

/// U(ε) = exp(i·t·(X + s(ε)Δ)) for ε = 0..M.
pub fn evolution_family(
    x: &ComplexMatrix,
    delta: &PerturbationDirection,
    enc: &GradientEncoding,
) -> Result<Vec<ComplexMatrix>> {
    check_operator(x, delta)?;
    let t = enc.time();
    (0..enc.deviation_dim())
        .map(|eps| {
            let s = enc.strength(eps);
            let h = if s == 0.0 { x.clone() } else { x + &delta.matrix.scale_real(s) };
            unitary_phase_exp(&h, t)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QgpeOutcome {
    pub distribution: Vec<f64>,
    pub peak_index: usize,
    pub peak_gradient: f64,
    /// Present only for m = 1.
    pub amplitude_gradient: Option<f64>,
    /// ‖Xp − (p†Xp)p‖₂; large values mean the input was not an eigenvector.
    pub eigenresidual: f64,
}

/// Smallest power of two ≥ max(n, 2), and its exponent.
fn padded_size(n: usize) -> (usize, u32) {
    let size = n.max(2).next_power_of_two();
    (size, size.trailing_zeros())
}

fn pad_matrix(a: &ComplexMatrix, size: usize) -> ComplexMatrix {
    let n = a.rows();
    if n == size {
        return a.clone();
    }
    ComplexMatrix::from_fn(size, size, |i, j| if i < n && j < n { a[(i, j)] } else { ZERO })
}

fn pad_vector(v: &[C64], size: usize) -> Vec<C64> {
    let mut out = v.to_vec();
    out.resize(size, ZERO);
    out
}

fn eigenresidual(x: &ComplexMatrix, p: &[C64]) -> f64 {
    let xp = x.matvec(p);
    let rq = dot(p, &xp);
    let r: Vec<C64> = xp.iter().zip(p).map(|(a, b)| a - rq * b).collect();
    norm(&r)
}

fn peak(distribution: &[f64]) -> usize {
    let mut best = 0;
    for (j, &p) in distribution.iter().enumerate() {
        if p > distribution[best] {
            best = j;
        }
    }
    best
}

/// Runs H^{⊗m} → controlled family → inverse QFT with the system register
/// holding `p`, returning the deviation distribution. `reference` adds an
/// exact controlled phase e^{i·ε·reference} to member ε.
fn run_circuit(
    x: &ComplexMatrix,
    p: &[C64],
    delta: &PerturbationDirection,
    enc: &GradientEncoding,
    reference: f64,
) -> Result<Vec<f64>> {
    check_operator(x, delta)?;
    if p.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: p.len(),
        });
    }
    let (size, n_qubits) = padded_size(x.rows());
    let xp = pad_matrix(x, size);
    let dp = PerturbationDirection {
        kind: delta.kind.clone(),
        matrix: pad_matrix(&delta.matrix, size),
    };
    let mut family = evolution_family(&xp, &dp, enc)?;
    if reference != 0.0 {
        for (eps, u) in family.iter_mut().enumerate() {
            *u = u.scale(C64::from_polar(1.0, reference * eps as f64));
        }
    }
    let layout = RegisterLayout::new(enc.m(), n_qubits)?;
    let state = StateVector::init_basis(layout, 0)?
        .prepare_system_state(&pad_vector(p, size))?
        .hadamard_deviation_register()
        .apply_controlled_family(&family)?
        .inverse_qft_deviation();
    Ok(state.deviation_distribution())
}

/// The full circuit on eigenvector candidate `p`. Dimensions that are not a
/// power of two are zero-padded.
pub fn qgpe_run(
    x: &ComplexMatrix,
    p: &[C64],
    delta: &PerturbationDirection,
    enc: &GradientEncoding,
) -> Result<QgpeOutcome> {
    let nrm = norm(p);
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedTarget { norm: nrm });
    }
    let distribution = run_circuit(x, p, delta, enc, 0.0)?;
    let peak_index = peak(&distribution);
    let amplitude_gradient = if enc.m() == 1 {
        Some(enc.amplitude_gradient(distribution[0], distribution[1])?)
    } else {
        None
    };
    Ok(QgpeOutcome {
        peak_gradient: enc.bin_gradient(peak_index),
        peak_index,
        amplitude_gradient,
        eigenresidual: eigenresidual(x, p),
        distribution,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedGradient {
    pub gradient: f64,
    pub p0: f64,
    /// W actually used: max(W, ‖Δ‖₂).
    pub w_effective: f64,
    pub eigenresidual: f64,
}

/// Signed single-qubit readout.
///
/// An exact controlled phase of π/2 per ε step is added to the family, so the
/// measured relative phase is π/2 + κ·∇λ. With W raised to at least ‖Δ‖₂ this
/// stays inside (0, π) where arccos is invertible, and ∇λ is recovered with
/// its sign. Uses m = 1 regardless of `enc.m()`.
pub fn qgpe_signed(
    x: &ComplexMatrix,
    p: &[C64],
    delta: &PerturbationDirection,
    enc: &GradientEncoding,
) -> Result<SignedGradient> {
    let nrm = norm(p);
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedTarget { norm: nrm });
    }
    let w_effective = enc.w().max(delta.spectral_norm());
    let enc1 = enc.with_m(1)?.with_w(w_effective)?;
    let dist = run_circuit(x, p, delta, &enc1, FRAC_PI_2)?;
    let phase = extract_gradient_m1(dist[0], dist[1], 1.0)?;
    Ok(SignedGradient {
        gradient: (phase - FRAC_PI_2) / enc1.phase_per_step(),
        p0: dist[0],
        w_effective,
        eigenresidual: eigenresidual(x, p),
    })
}

/// 2·arccos(√p₀)·W, the single-qubit amplitude readout. Magnitude only.
pub fn extract_gradient_m1(p0: f64, p1: f64, w: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    let bad = !(p0.is_finite() && p1.is_finite())
        || (p0 + p1 - 1.0).abs() > 1e-8
        || p0 < -SLACK
        || p1 < -SLACK
        || p0 > 1.0 + SLACK
        || p1 > 1.0 + SLACK;
    if bad {
        return Err(Error::ProbabilityOutOfRange { p0, p1 });
    }
    Ok(2.0 * p0.clamp(0.0, 1.0).sqrt().acos() * w)
}

/// Gradient at the most probable bin (lowest index on ties).
pub fn extract_gradient_peak(distribution: &[f64], enc: &GradientEncoding) -> Result<f64> {
    if distribution.len() != enc.deviation_dim() {
        return Err(Error::DimensionMismatch {
            expected: enc.deviation_dim(),
            found: distribution.len(),
        });
    }
    let j = peak(distribution);
    let max_probability = distribution[j];
    if max_probability < 2.0 / distribution.len() as f64 {
        return Err(Error::FlatDistribution { max_probability });
    }
    Ok(enc.bin_gradient(j))
}
