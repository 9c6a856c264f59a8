//! Inverse expectation values and log-determinant gradients assembled from
//! per-eigenvector gradient phase estimation, plus the superposition (Σ) and
//! sampled variants.
//!
//! Everything here rests on ⟨Φ|X⁻¹|Φ⟩ = Σ_p δE_p/E_p, where δE_p is the
//! derivative of eigenvalue E_p along Δ = |Φ⟩⟨Φ|.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{random_unitary, rng_from_seed};
use crate::lanczos::{relevance_order, run_rqbl};
use crate::numeric::{dot, eig_hermitian, inverse, norm, ComplexMatrix, Tolerances, C64, ZERO};
use crate::qgpe::{
    build_delta, extract_gradient_peak, qgpe_run, qgpe_signed, DeltaKind, GradientEncoding, PerturbationDirection,
};
use crate::statevector::{RegisterLayout, StateVector};

/// |E_p| at or below this fraction of ‖X‖_F counts as zero.
pub const NEAR_ZERO_TOL: f64 = 1e-10;
/// Largest admissible eigenpair residual, relative to ‖X‖_F.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Σ-QGLD keeps every per-eigenstate register phase below this.
const SIGMA_MAX_PHASE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EigenSource {
    Dense,
    Rqbl { b: usize, seed: u64 },
}

/// How each per-eigenvector run is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// m = 1 with a π/2 reference phase; signed and unquantized.
    #[default]
    Signed,
    /// Most probable inverse-QFT bin under the request's encoding.
    Peak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseExpectationRequest {
    pub x: ComplexMatrix,
    pub phi: Vec<C64>,
    pub k: usize,
    pub enc: GradientEncoding,
    pub eigensource: EigenSource,
    pub readout: Readout,
    /// Skip |E_p| ≤ 1e-10·‖X‖_F instead of failing.
    pub pseudo_inverse: bool,
}

impl InverseExpectationRequest {
    pub fn new(x: ComplexMatrix, phi: Vec<C64>, k: usize, enc: GradientEncoding) -> Result<Self> {
        let r = Self {
            x,
            phi,
            k,
            enc,
            eigensource: EigenSource::Dense,
            readout: Readout::Signed,
            pseudo_inverse: false,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.rows();
        if !self.x.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.x.cols(),
            });
        }
        if self.phi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.phi.len(),
            });
        }
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidArgument(format!("k must lie in [1, {n}], got {}", self.k)));
        }
        let nrm = norm(&self.phi);
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::UnnormalizedPhi { norm: nrm });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    /// Position in relevance order (0 = largest |E_p|).
    pub rank: usize,
    pub eigenvalue: f64,
    /// Gradient read from the circuit.
    pub delta_e: f64,
    /// δE_p / E_p
    pub yp: f64,
    /// ⟨p|Δ|p⟩ computed classically, for comparison.
    pub oracle_delta_e: f64,
    /// ‖Xp − E_p p‖₂ of the eigenvector fed to the circuit.
    pub eigenresidual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEigenvalue {
    pub rank: usize,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseExpectationReport {
    pub contributions: Vec<Contribution>,
    pub total: f64,
    pub classical_reference: Option<f64>,
    pub skipped: Vec<SkippedEigenvalue>,
    pub encoding: GradientEncoding,
    pub eigensource: EigenSource,
    pub readout: Readout,
    pub k: usize,
}

impl InverseExpectationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

struct EigenPair {
    value: f64,
    vector: Vec<C64>,
    residual: f64,
}

fn residual(x: &ComplexMatrix, value: f64, v: &[C64]) -> f64 {
    let xv = x.matvec(v);
    xv.iter().zip(v).map(|(a, b)| (a - value * b).norm_sqr()).sum::<f64>().sqrt()
}

/// Dense eigenpairs with each degenerate cluster rotated so that Δ is
/// diagonal inside it; those are the vectors that stay eigenvectors of
/// X + sΔ to first order.
fn dense_pairs(x: &ComplexMatrix, delta: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let tol = Tolerances::default();
    let eig = eig_hermitian(x)?;
    let n = eig.len();
    let gap = tol.degenerate_gap * x.frobenius_norm();
    let mut vectors = eig.vectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end] - eig.values[end - 1] <= gap {
            end += 1;
        }
        if end - start > 1 {
            let p = eig.vectors.columns(start, end);
            let restricted = p.adjoint().matmul(delta).matmul(&p);
            let restricted = ComplexMatrix::from_fn(end - start, end - start, |i, j| {
                0.5 * (restricted[(i, j)] + restricted[(j, i)].conj())
            });
            let rotated = p.matmul(&eig_hermitian(&restricted)?.vectors);
            for c in 0..(end - start) {
                vectors.set_column(start + c, &rotated.column(c));
            }
        }
        start = end;
    }
    Ok((0..n)
        .map(|p| {
            let v = vectors.column(p);
            EigenPair {
                value: eig.values[p],
                residual: residual(x, eig.values[p], &v),
                vector: v,
            }
        })
        .collect())
}

/// The k most relevant eigenpairs (|E| descending, +E first on ties).
fn relevant_pairs(x: &ComplexMatrix, delta: &ComplexMatrix, k: usize, source: EigenSource) -> Result<Vec<EigenPair>> {
    let pairs = match source {
        EigenSource::Dense => dense_pairs(x, delta)?,
        EigenSource::Rqbl { b, seed } => {
            if b == 0 || b > x.rows() {
                return Err(Error::InvalidArgument(format!("block size must lie in [1, {}], got {b}", x.rows())));
            }
            let sol = run_rqbl(x, b, x.rows() / b, seed)?;
            sol.values
                .into_iter()
                .zip(sol.vectors)
                .zip(sol.residuals)
                .map(|((value, vector), residual)| EigenPair { value, vector, residual })
                .collect()
        }
    };
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let order = relevance_order(&values);
    if k > order.len() {
        return Err(Error::InvalidArgument(format!(
            "requested k={k} eigenpairs but the eigensource produced {}",
            order.len()
        )));
    }
    let scale = x.frobenius_norm();
    let mut slots: Vec<Option<EigenPair>> = pairs.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(k);
    for (rank, &i) in order.iter().take(k).enumerate() {
        let pair = slots[i].take().expect("each index appears once");
        if pair.residual > RESIDUAL_TOL * scale {
            return Err(Error::UnconvergedEigenpair {
                index: rank,
                residual: pair.residual,
            });
        }
        out.push(pair);
    }
    Ok(out)
}

/// Per-eigenvector gradients along `delta`, weighted by 1/E_p and summed in
/// relevance order.
pub fn gradient_report(
    x: &ComplexMatrix,
    delta: &PerturbationDirection,
    k: usize,
    enc: &GradientEncoding,
    source: EigenSource,
    readout: Readout,
    pseudo_inverse: bool,
) -> Result<InverseExpectationReport> {
    x.check_hermitian(Tolerances::default().hermitian)?;
    let pairs = relevant_pairs(x, delta.matrix(), k, source)?;
    let floor = NEAR_ZERO_TOL * x.frobenius_norm();
    let mut contributions = Vec::with_capacity(k);
    let mut skipped = Vec::new();
    for (rank, pair) in pairs.iter().enumerate() {
        if pair.value.abs() <= floor {
            if pseudo_inverse {
                skipped.push(SkippedEigenvalue {
                    rank,
                    eigenvalue: pair.value,
                });
                continue;
            }
            return Err(Error::NearZeroEigenvalue {
                index: rank,
                eigenvalue: pair.value,
            });
        }
        let delta_e = match readout {
            Readout::Signed => qgpe_signed(x, &pair.vector, delta, enc)?.gradient,
            Readout::Peak => extract_gradient_peak(&qgpe_run(x, &pair.vector, delta, enc)?.distribution, enc)?,
        };
        let oracle = dot(&pair.vector, &delta.matrix().matvec(&pair.vector)).re;
        contributions.push(Contribution {
            rank,
            eigenvalue: pair.value,
            delta_e,
            yp: delta_e / pair.value,
            oracle_delta_e: oracle,
            eigenresidual: pair.residual,
        });
    }
    let total = contributions.iter().fold(0.0, |acc, c| acc + c.yp);
    Ok(InverseExpectationReport {
        contributions,
        total,
        classical_reference: None,
        skipped,
        encoding: *enc,
        eigensource: source,
        readout,
        k,
    })
}

/// Σ_p δE_p/E_p along the symmetric element direction (i, j), 0-based.
///
/// At k = N and small L this is (X⁻¹)_ij + (X⁻¹)_ji for i ≠ j and (X⁻¹)_ii
/// for i = j: the symmetric direction moves both mirrored entries.
pub fn logdet_gradient_entry(
    x: &ComplexMatrix,
    i: usize,
    j: usize,
    k: usize,
    enc: &GradientEncoding,
    source: EigenSource,
) -> Result<f64> {
    let delta = build_delta(DeltaKind::Element { i, j }, x.rows())?;
    Ok(gradient_report(x, &delta, k, enc, source, Readout::Signed, false)?.total)
}

/// QGLD estimate of ⟨Φ|X⁻¹|Φ⟩ with Δ = |Φ⟩⟨Φ|, with the classical value attached.
pub fn qgld_expectation(req: &InverseExpectationRequest) -> Result<InverseExpectationReport> {
    req.validate()?;
    let delta = build_delta(DeltaKind::Outer { phi: req.phi.clone() }, req.x.rows())?;
    let mut report = gradient_report(
        &req.x,
        &delta,
        req.k,
        &req.enc,
        req.eigensource,
        req.readout,
        req.pseudo_inverse,
    )?;
    report.classical_reference = classical_reference_expectation(&req.x, &req.phi).ok();
    Ok(report)
}

/// Φ†·X⁻¹·Φ through the LU inverse.
pub fn classical_reference_expectation(x: &ComplexMatrix, phi: &[C64]) -> Result<f64> {
    x.check_hermitian(Tolerances::default().hermitian)?;
    if phi.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: phi.len(),
        });
    }
    let y = inverse(x)?;
    let q = dot(phi, &y.matvec(phi));
    debug_assert!(q.im.abs() < 1e-10 * (1.0 + q.re.abs()), "imaginary part {}", q.im);
    Ok(q.re)
}

/// Σ_p |⟨Φ|p⟩|²/E_p, the spectral form of the same quadratic form.
pub fn spectral_reference_expectation(x: &ComplexMatrix, phi: &[C64]) -> Result<f64> {
    let eig = eig_hermitian(x)?;
    Ok((0..eig.len())
        .map(|p| dot(&eig.vector(p), phi).norm_sqr() / eig.values[p])
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReadout {
    pub total: f64,
    pub p0: f64,
    pub w_effective: f64,
    /// Register dimension actually simulated (N padded to a power of two).
    pub dim: usize,
}

/// Shared set-up of the superposition circuit: eigenbasis, per-state rates
/// G_p = ⟨p|Δ|p⟩/E_p and the controlled family.
struct SigmaCircuit {
    vectors: ComplexMatrix,
    family: Vec<ComplexMatrix>,
    kappa: f64,
    w_effective: f64,
    dim: usize,
}

/// Rotates the global phase so the largest-magnitude component is real positive.
fn fix_phase_largest(v: &mut [C64]) {
    let lead = v.iter().copied().fold(ZERO, |best, z| if z.norm() > best.norm() { z } else { best });
    if lead.norm() > 0.0 {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

fn sigma_circuit(x: &ComplexMatrix, phi: &[C64], enc: &GradientEncoding) -> Result<SigmaCircuit> {
    x.check_hermitian(Tolerances::default().hermitian)?;
    let n = x.rows();
    let delta = build_delta(DeltaKind::Outer { phi: phi.to_vec() }, n)?;
    // Pad with an identity block: its eigenvectors carry no weight of Φ, so
    // they contribute G_p = 0 and leave the sum unchanged.
    let dim = n.max(2).next_power_of_two();
    let xp = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i < n && j < n {
            x[(i, j)]
        } else if i == j {
            C64::new(1.0, 0.0)
        } else {
            ZERO
        }
    });
    let dp = ComplexMatrix::from_fn(dim, dim, |i, j| if i < n && j < n { delta.matrix()[(i, j)] } else { ZERO });

    let eig = eig_hermitian(&xp)?;
    let floor = NEAR_ZERO_TOL * x.frobenius_norm();
    if let Some(p) = eig.values.iter().position(|e| e.abs() <= floor) {
        return Err(Error::NearZeroEigenvalue {
            index: p,
            eigenvalue: eig.values[p],
        });
    }
    let mut vectors = eig.vectors.clone();
    for p in 0..dim {
        let mut v = vectors.column(p);
        fix_phase_largest(&mut v);
        vectors.set_column(p, &v);
    }
    let rates: Vec<f64> = (0..dim)
        .map(|p| {
            let v = vectors.column(p);
            dot(&v, &dp.matvec(&v)).re / eig.values[p]
        })
        .collect();
    let min_abs = eig.values.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    let unit = enc.with_w(1.0)?.phase_per_step();
    let w_effective = enc.w().max(unit * delta.spectral_norm() / (SIGMA_MAX_PHASE * min_abs));
    let enc1 = enc.with_m(1)?.with_w(w_effective)?;
    let t = enc1.time();

    // exp(i·t·(E_p + s·G_p)) in the eigenbasis, then the inverse evolution
    // exp(−i·t·X), then the π/2-per-step reference phase.
    let inverse_evolution = eig.map(|e| C64::from_polar(1.0, -t * e));
    let family = (0..2)
        .map(|eps| {
            let s = enc1.strength(eps);
            let mut scaled = vectors.clone();
            for p in 0..dim {
                // split so the large t·E_p phase cancels bit for bit against the inverse
                let ph = C64::from_polar(1.0, t * eig.values[p]) * C64::from_polar(1.0, t * s * rates[p]);
                for i in 0..dim {
                    scaled[(i, p)] *= ph;
                }
            }
            let forward = scaled.matmul(&vectors.adjoint());
            forward
                .matmul(&inverse_evolution)
                .scale(C64::from_polar(1.0, FRAC_PI_2 * eps as f64))
        })
        .collect();
    Ok(SigmaCircuit {
        vectors,
        family,
        kappa: enc1.phase_per_step(),
        w_effective,
        dim,
    })
}

/// Runs the m = 1 circuit with `state` on the system register and maps
/// p₀ = (1 − Σ_p |c_p|²·sin(κG_p))/2 back to N·Σ_p |c_p|²·G_p.
fn sigma_estimate(c: &SigmaCircuit, state: &[C64]) -> Result<(f64, f64)> {
    let layout = RegisterLayout::new(1, c.dim.trailing_zeros())?;
    let out = StateVector::init_basis(layout, 0)?
        .prepare_system_state(state)?
        .hadamard_deviation_register()
        .apply_controlled_family(&c.family)?
        .inverse_qft_deviation();
    let p0 = out.deviation_distribution()[0];
    let s = (1.0 - 2.0 * p0).clamp(-1.0, 1.0);
    Ok((c.dim as f64 * s.asin() / c.kappa, p0))
}

/// Σ-QGLD: one circuit on the equal superposition of all eigenvectors.
pub fn sigma_qgld_readout(x: &ComplexMatrix, phi: &[C64], enc: &GradientEncoding) -> Result<SigmaReadout> {
    let c = sigma_circuit(x, phi, enc)?;
    let amp = C64::new(1.0 / (c.dim as f64).sqrt(), 0.0);
    let mut state = vec![ZERO; c.dim];
    for p in 0..c.dim {
        for (i, z) in state.iter_mut().enumerate() {
            *z += amp * c.vectors[(i, p)];
        }
    }
    let (total, p0) = sigma_estimate(&c, &state)?;
    Ok(SigmaReadout {
        total,
        p0,
        w_effective: c.w_effective,
        dim: c.dim,
    })
}

pub fn sigma_qgld_expectation(x: &ComplexMatrix, phi: &[C64], enc: &GradientEncoding) -> Result<f64> {
    Ok(sigma_qgld_readout(x, phi, enc)?.total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledEstimate {
    pub estimate: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for one sample.
    pub spread: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
}

/// Averages the superposition readout over random orthonormal start states.
///
/// States are drawn N at a time as the columns of a random unitary, so every
/// complete batch weights the eigenbasis evenly. Experimental: no convergence
/// guarantee beyond the law of large numbers.
pub fn sampled_qgld(
    x: &ComplexMatrix,
    phi: &[C64],
    n_samples: usize,
    seed: u64,
    enc: &GradientEncoding,
) -> Result<SampledEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let c = sigma_circuit(x, phi, enc)?;
    let mut rng = rng_from_seed(seed);
    let mut samples = Vec::with_capacity(n_samples);
    while samples.len() < n_samples {
        let batch = random_unitary(c.dim, true, &mut rng);
        for col in 0..c.dim {
            if samples.len() == n_samples {
                break;
            }
            samples.push(sigma_estimate(&c, &batch.column(col))?.0);
        }
    }
    let n = samples.len() as f64;
    let estimate = samples.iter().sum::<f64>() / n;
    let spread = if samples.len() > 1 {
        (samples.iter().map(|s| (s - estimate).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SampledEstimate {
        estimate,
        spread,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{geometric_spectrum, random_nonsingular_hermitian, random_spd, random_state};
    use crate::numeric::presets::*;

    fn enc(l: f64) -> GradientEncoding {
        GradientEncoding::canonical(l, 1).unwrap()
    }

    fn request(x: ComplexMatrix, phi: Vec<C64>, k: usize, l: f64) -> InverseExpectationRequest {
        InverseExpectationRequest::new(x, phi, k, enc(l)).unwrap()
    }

    #[test]
    fn entry_examples() {
        let e = enc(1e-6);
        let g = logdet_gradient_entry(&pauli_x(), 0, 1, 1, &e, EigenSource::Dense).unwrap();
        assert!((g - 1.0).abs() < 2e-6, "{g}");
        let g = logdet_gradient_entry(&pauli_z(), 0, 1, 2, &e, EigenSource::Dense).unwrap();
        assert!(g.abs() < 2e-6, "{g}");
        let g = logdet_gradient_entry(&ComplexMatrix::diag(&[2.0, 4.0]), 0, 0, 2, &e, EigenSource::Dense).unwrap();
        assert!((g - 0.5).abs() < 2e-6, "{g}");
    }

    #[test]
    fn entries_match_lu_inverse_including_indefinite() {
        let mut rng = rng_from_seed(303);
        let e = enc(1e-6);
        for n in [2usize, 4, 8] {
            let x = random_nonsingular_hermitian(n, &mut rng);
            let y = inverse(&x).unwrap();
            for (i, j) in [(0, 0), (0, n - 1), (n / 2, n / 2)] {
                let g = logdet_gradient_entry(&x, i, j, n, &e, EigenSource::Dense).unwrap();
                let want = if i == j { y[(i, i)].re } else { (y[(i, j)] + y[(j, i)]).re };
                assert!((g - want).abs() < 1e-4, "n={n} ({i},{j}) {g} vs {want}");
            }
        }
    }

    #[test]
    fn near_zero_eigenvalue_is_reported_or_skipped() {
        let x = ComplexMatrix::diag(&[2.0, 0.0]);
        let e = enc(1e-6);
        assert!(matches!(
            logdet_gradient_entry(&x, 0, 0, 2, &e, EigenSource::Dense),
            Err(Error::NearZeroEigenvalue { .. })
        ));
        let d = build_delta(DeltaKind::Element { i: 0, j: 0 }, 2).unwrap();
        let r = gradient_report(&x, &d, 2, &e, EigenSource::Dense, Readout::Signed, true).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert!((r.total - 0.5).abs() < 2e-6);
    }

    #[test]
    fn expectation_examples() {
        let r = qgld_expectation(&request(pauli_z(), plus(), 2, 1e-6)).unwrap();
        assert!(r.total.abs() < 2e-6);
        let phi = random_state(4, true, &mut rng_from_seed(1));
        let r = qgld_expectation(&request(ComplexMatrix::identity(4), phi, 4, 1e-6)).unwrap();
        assert!((r.total - 1.0).abs() < 2e-6, "{}", r.total);

        let mut rng = rng_from_seed(8);
        let x = random_spd(8, &mut rng);
        let phi = random_state(8, true, &mut rng);
        let r = qgld_expectation(&request(x, phi, 8, 1e-5)).unwrap();
        assert!((r.total - r.classical_reference.unwrap()).abs() < 1e-4);
    }

    #[test]
    fn report_invariants() {
        let mut rng = rng_from_seed(19);
        let x = random_nonsingular_hermitian(4, &mut rng);
        let phi = random_state(4, true, &mut rng);
        let r = qgld_expectation(&request(x, phi, 4, 1e-6)).unwrap();
        let sum = r.contributions.iter().fold(0.0, |a, c| a + c.yp);
        assert_eq!(sum, r.total);
        for c in &r.contributions {
            assert_eq!(c.yp, c.delta_e / c.eigenvalue);
            assert!((c.delta_e - c.oracle_delta_e).abs() < 1e-5);
        }
        let mags: Vec<f64> = r.contributions.iter().map(|c| c.eigenvalue.abs()).collect();
        assert!(mags.windows(2).all(|w| w[0] >= w[1]));
        let back: InverseExpectationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn contributions_are_real() {
        let mut rng = rng_from_seed(23);
        let x = random_nonsingular_hermitian(8, &mut rng);
        let phi = random_state(8, true, &mut rng);
        let d = build_delta(DeltaKind::Outer { phi }, 8).unwrap();
        for pair in dense_pairs(&x, d.matrix()).unwrap() {
            assert!(dot(&pair.vector, &d.matrix().matvec(&pair.vector)).im.abs() < 1e-10);
        }
    }

    #[test]
    fn error_is_linear_in_l() {
        let mut rng = rng_from_seed(55);
        for n in [2usize, 4, 8] {
            let x = random_nonsingular_hermitian(n, &mut rng);
            let phi = random_state(n, true, &mut rng);
            let want = classical_reference_expectation(&x, &phi).unwrap();
            let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&l| (qgld_expectation(&request(x.clone(), phi.clone(), n, l)).unwrap().total - want).abs())
                .collect();
            for w in errs.windows(2) {
                assert!((5.0..=20.0).contains(&(w[0] / w[1])), "n={n} {errs:?}");
            }
        }
    }

    #[test]
    fn rank_truncation_error_is_bounded_by_omitted_terms() {
        let mut rng = rng_from_seed(77);
        let x = geometric_spectrum(8, &mut rng);
        let phi = random_state(8, false, &mut rng);
        let eig = eig_hermitian(&x).unwrap();
        let full = qgld_expectation(&request(x.clone(), phi.clone(), 8, 1e-6)).unwrap().total;
        let quantum_err = (full - classical_reference_expectation(&x, &phi).unwrap()).abs();
        for k in 1..8 {
            let t = qgld_expectation(&request(x.clone(), phi.clone(), k, 1e-6)).unwrap().total;
            // eigenvalues ascend, so the omitted (least relevant) ones are the first 8 − k
            let bound: f64 = (0..8 - k).map(|p| dot(&eig.vector(p), &phi).norm_sqr() / eig.values[p]).sum();
            assert!((t - full).abs() <= bound + 2.0 * quantum_err + 1e-9, "k={k}");
        }
    }

    #[test]
    fn rqbl_eigensource_agrees_with_dense() {
        let mut rng = rng_from_seed(91);
        let x = random_spd(8, &mut rng);
        let phi = random_state(8, true, &mut rng);
        let mut req = request(x, phi, 8, 1e-6);
        let dense = qgld_expectation(&req).unwrap().total;
        req.eigensource = EigenSource::Rqbl { b: 2, seed: 3 };
        let krylov = qgld_expectation(&req).unwrap().total;
        assert!((dense - krylov).abs() < 1e-6);
    }

    #[test]
    fn peak_readout_is_quantized_but_close() {
        let x = ComplexMatrix::diag(&[2.0, 4.0]);
        let e = GradientEncoding::new(1e-6, 2.0, 8, crate::qgpe::Shift::Centered, false).unwrap();
        let mut req = InverseExpectationRequest::new(x, plus(), 2, e).unwrap();
        req.readout = Readout::Peak;
        let r = qgld_expectation(&req).unwrap();
        assert!((r.total - 0.375).abs() <= e.bin_width() / 2.0 * (0.5 + 0.25));
    }

    #[test]
    fn classical_reference_examples() {
        let phi = random_state(3, true, &mut rng_from_seed(2));
        assert!((classical_reference_expectation(&ComplexMatrix::identity(3), &phi).unwrap() - 1.0).abs() < 1e-14);
        assert!(classical_reference_expectation(&pauli_z(), &plus()).unwrap().abs() < 1e-15);
        let mut rng = rng_from_seed(16);
        let x = random_spd(16, &mut rng);
        let phi = random_state(16, true, &mut rng);
        let a = classical_reference_expectation(&x, &phi).unwrap();
        let b = spectral_reference_expectation(&x, &phi).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn sigma_examples() {
        let e = enc(1e-6);
        assert!(sigma_qgld_expectation(&pauli_z(), &plus(), &e).unwrap().abs() < 2e-6);
        let g = sigma_qgld_expectation(&ComplexMatrix::identity(2), &basis(2, 0), &e).unwrap();
        assert!((g - 1.0).abs() < 1e-6, "{g}");
        let g = sigma_qgld_expectation(&ComplexMatrix::diag(&[2.0, 4.0]), &plus(), &e).unwrap();
        assert!((g - 0.375).abs() < 1e-6, "{g}");
    }

    #[test]
    fn sigma_inverse_evolution_cancels_eigenphases() {
        let mut rng = rng_from_seed(5);
        let x = random_spd(4, &mut rng);
        let phi = random_state(4, true, &mut rng);
        let c = sigma_circuit(&x, &phi, &enc(1e-6)).unwrap();
        // member 0 has s = 0: forward and inverse evolution must cancel
        assert!((&c.family[0] - &ComplexMatrix::identity(4)).max_abs() < 1e-10);
    }

    #[test]
    fn sigma_matches_per_eigenvector_qgld() {
        let mut rng = rng_from_seed(66);
        for n in [2usize, 3, 4, 8] {
            let x = random_nonsingular_hermitian(n, &mut rng);
            let phi = random_state(n, true, &mut rng);
            let q = qgld_expectation(&request(x.clone(), phi.clone(), n, 1e-6)).unwrap().total;
            let s = sigma_qgld_expectation(&x, &phi, &enc(1e-6)).unwrap();
            assert!((q - s).abs() < 2e-4, "n={n} {q} vs {s}");
        }
    }

    #[test]
    fn sampled_examples() {
        let e = enc(1e-6);
        let r = sampled_qgld(&ComplexMatrix::identity(4), &uniform(4), 1, 3, &e).unwrap();
        // exact up to p₀ roundoff amplified by N/κ ≈ 4e3
        assert!((r.estimate - 1.0).abs() < 1e-10 && r.spread == 0.0, "{r:?}");
        let a = sampled_qgld(&ComplexMatrix::diag(&[2.0, 4.0]), &plus(), 16, 9, &e).unwrap();
        assert_eq!(a, sampled_qgld(&ComplexMatrix::diag(&[2.0, 4.0]), &plus(), 16, 9, &e).unwrap());
        let r = sampled_qgld(&ComplexMatrix::diag(&[2.0, 4.0]), &plus(), 256, 11, &e).unwrap();
        assert!((r.estimate - 0.375).abs() <= 3.0 * r.spread, "{} ± {}", r.estimate, r.spread);
        assert!(sampled_qgld(&pauli_z(), &plus(), 0, 1, &e).is_err());
    }
}
