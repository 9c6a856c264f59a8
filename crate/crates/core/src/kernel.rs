//! Gaussian-kernel ridge regression with either a classical or a QGLD solve
//! for α = (K + λI)⁻¹f.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{eig_hermitian, inverse, ComplexMatrix, C64, ZERO};
use crate::qgld::{qgld_expectation, InverseExpectationRequest};
use crate::qgpe::GradientEncoding;

/// Largest condition number of K + λI the fit accepts.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelSolver {
    Classical,
    /// Each α_i from four QGLD quadratic forms. With `richardson` every form
    /// is evaluated at L and L/2 and combined as 2·q(L/2) − q(L), which
    /// removes the first-order error in L.
    Qgld {
        k: usize,
        enc: GradientEncoding,
        richardson: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub training_points: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub sigma: f64,
    pub lambda: f64,
    pub alpha: Vec<f64>,
    pub solver: KernelSolver,
}

pub fn gaussian_kernel(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (-d2 / (sigma * sigma)).exp()
}

pub fn kernel_matrix(points: &[Vec<f64>], sigma: f64) -> ComplexMatrix {
    let n = points.len();
    ComplexMatrix::from_fn(n, n, |i, j| C64::new(gaussian_kernel(&points[i], &points[j], sigma), 0.0))
}

fn validate(points: &[Vec<f64>], targets: &[f64], sigma: f64, lambda: f64) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no training points".into()));
    }
    if points.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: targets.len(),
        });
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let d = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.len() });
        }
        if points[..i].iter().any(|q| q == p) {
            return Err(Error::InvalidArgument(format!("training point {i} is a duplicate")));
        }
    }
    Ok(())
}

pub fn kernel_fit(
    points: &[Vec<f64>],
    targets: &[f64],
    sigma: f64,
    lambda: f64,
    solver: KernelSolver,
) -> Result<KernelModel> {
    validate(points, targets, sigma, lambda)?;
    let n = points.len();
    let a = &kernel_matrix(points, sigma) + &ComplexMatrix::identity(n).scale_real(lambda);

    let eig = eig_hermitian(&a)?;
    let (lo, hi) = eig
        .values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.abs()), hi.max(e.abs())));
    let condition = hi / lo;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }

    let alpha = match solver {
        KernelSolver::Classical => {
            let f: Vec<C64> = targets.iter().map(|&t| C64::new(t, 0.0)).collect();
            inverse(&a)?.matvec(&f).iter().map(|z| z.re).collect()
        }
        KernelSolver::Qgld { k, enc, richardson } => qgld_weights(&a, targets, k, &enc, richardson)?,
    };
    Ok(KernelModel {
        training_points: points.to_vec(),
        targets: targets.to_vec(),
        sigma,
        lambda,
        alpha,
        solver,
    })
}

/// ‖v‖²·⟨v̂|A⁻¹|v̂⟩ from QGLD.
fn quadratic_form(a: &ComplexMatrix, v: &[C64], k: usize, enc: &GradientEncoding, richardson: bool) -> Result<f64> {
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if n2 == 0.0 {
        return Ok(0.0);
    }
    let s = 1.0 / n2.sqrt();
    let phi: Vec<C64> = v.iter().map(|z| z * s).collect();
    let at = |enc: GradientEncoding| -> Result<f64> {
        let req = InverseExpectationRequest::new(a.clone(), phi.clone(), k, enc)?;
        Ok(qgld_expectation(&req)?.total)
    };
    let q = if richardson {
        2.0 * at(enc.with_l(enc.l() / 2.0)?)? - at(*enc)?
    } else {
        at(*enc)?
    };
    Ok(n2 * q)
}

/// α_i = ‖f‖·Re⟨e_i|A⁻¹|f̂⟩ with ⟨a|Y|b⟩ = ¼·Σ_k i^{−k}·Q(a + i^k·b).
fn qgld_weights(a: &ComplexMatrix, targets: &[f64], k: usize, enc: &GradientEncoding, richardson: bool) -> Result<Vec<f64>> {
    let n = targets.len();
    let fnorm = targets.iter().map(|t| t * t).sum::<f64>().sqrt();
    if fnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let phases = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    (0..n)
        .map(|i| {
            let mut bilinear = ZERO;
            for ph in phases {
                let v: Vec<C64> = (0..n)
                    .map(|r| {
                        let e = if r == i { 1.0 } else { 0.0 };
                        C64::new(e, 0.0) + ph * (targets[r] / fnorm)
                    })
                    .collect();
                bilinear += ph.conj() * quadratic_form(a, &v, k, enc, richardson)?;
            }
            Ok(fnorm * bilinear.re / 4.0)
        })
        .collect()
}

pub fn kernel_predict(model: &KernelModel, x: &[f64]) -> f64 {
    model
        .training_points
        .iter()
        .zip(&model.alpha)
        .map(|(p, a)| a * gaussian_kernel(x, p, model.sigma))
        .sum()
}

/// Evenly spaced samples of sin on [0, 2π] (endpoints included).
pub fn sine_training_set(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let tau = std::f64::consts::TAU;
    let xs: Vec<f64> = (0..n).map(|i| tau * i as f64 / (n.max(2) - 1) as f64).collect();
    (xs.iter().map(|&x| vec![x]).collect(), xs.iter().map(|x| x.sin()).collect())
}

/// Held-out points strictly between the training nodes of `sine_training_set`.
pub fn sine_holdout(n: usize) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    (0..n).map(|i| tau * (i as f64 + 0.5) / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qgld_solver(k: usize) -> KernelSolver {
        KernelSolver::Qgld {
            k,
            enc: GradientEncoding::canonical(1e-6, 1).unwrap(),
            richardson: true,
        }
    }

    #[test]
    fn single_point() {
        let m = kernel_fit(&[vec![0.3, -1.0]], &[2.0], 1.0, 0.5, KernelSolver::Classical).unwrap();
        assert!((m.alpha[0] - 2.0 / 1.5).abs() < 1e-14);
    }

    #[test]
    fn large_ridge_limit() {
        let (p, f) = sine_training_set(8);
        let lambda = 1e6;
        let m = kernel_fit(&p, &f, 1.0, lambda, KernelSolver::Classical).unwrap();
        for (a, t) in m.alpha.iter().zip(&f) {
            assert!((a - t / lambda).abs() <= 0.01 * (t / lambda).abs() + 1e-12);
        }
    }

    #[test]
    fn interpolates_training_points() {
        let p: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 1.5]).collect();
        let f: Vec<f64> = p.iter().map(|x| x[0].cos()).collect();
        let m = kernel_fit(&p, &f, 1.0, 1e-10, KernelSolver::Classical).unwrap();
        for (x, t) in p.iter().zip(&f) {
            assert!((kernel_predict(&m, x) - t).abs() < 1e-6);
        }
        let zero = KernelModel {
            alpha: vec![0.0; 5],
            ..m
        };
        assert_eq!(kernel_predict(&zero, &[0.7]), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let p = vec![vec![0.0], vec![0.0]];
        assert!(kernel_fit(&p, &[1.0, 2.0], 1.0, 1e-3, KernelSolver::Classical).is_err());
        assert!(kernel_fit(&[vec![0.0]], &[1.0], 1.0, 0.0, KernelSolver::Classical).is_err());
        // nearly coincident points drive the condition number past the cap
        let p = vec![vec![0.0], vec![1e-9]];
        assert!(matches!(
            kernel_fit(&p, &[1.0, 2.0], 1.0, 1e-14, KernelSolver::Classical),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn polarization_recovers_bilinear_form() {
        // exact oracle: replace QGLD by the dense inverse and check the identity itself
        let a = ComplexMatrix::from_real(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap();
        let y = inverse(&a).unwrap();
        let b = [0.6, -0.8, 0.0];
        let q = |v: &[C64]| crate::numeric::dot(v, &y.matvec(v));
        let phases = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        let mut s = ZERO;
        for ph in phases {
            let v: Vec<C64> = (0..3).map(|r| C64::new(if r == 1 { 1.0 } else { 0.0 }, 0.0) + ph * b[r]).collect();
            s += ph.conj() * q(&v);
        }
        let want: f64 = (0..3).map(|c| y[(1, c)].re * b[c]).sum();
        assert!((s.re / 4.0 - want).abs() < 1e-14);
    }

    #[test]
    fn qgld_solver_matches_classical_on_sine() {
        let (p, f) = sine_training_set(16);
        let classical = kernel_fit(&p, &f, 1.0, 1e-6, KernelSolver::Classical).unwrap();
        let quantum = kernel_fit(&p, &f, 1.0, 1e-6, qgld_solver(16)).unwrap();
        let diff = classical
            .alpha
            .iter()
            .zip(&quantum.alpha)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-3, "{diff}");
        let err = |m: &KernelModel| {
            sine_holdout(50)
                .iter()
                .fold(0.0f64, |e, &x| e.max((kernel_predict(m, &[x]) - x.sin()).abs()))
        };
        assert!(err(&classical) < 1e-2);
        assert!((err(&classical) - err(&quantum)).abs() < 1e-3);
    }

    #[test]
    fn model_json_round_trip() {
        let (p, f) = sine_training_set(4);
        let m = kernel_fit(&p, &f, 1.0, 1e-3, qgld_solver(4)).unwrap();
        let back: KernelModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
