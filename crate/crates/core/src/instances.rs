//! Seeded random test instances: states, unitaries, and hermitian matrices
//! with controlled spectra.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::numeric::{normalized, orthonormalize_svd, ComplexMatrix, C64};

pub type InstanceRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn gaussian(rng: &mut InstanceRng, complex: bool) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
    C64::new(re, im)
}

/// Matrix of independent standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, complex: bool, rng: &mut InstanceRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng, complex))
}

/// Uniformly random unit vector.
pub fn random_state(n: usize, complex: bool, rng: &mut InstanceRng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| gaussian(rng, complex)).collect();
        if crate::numeric::norm(&v) > 1e-8 {
            return normalized(&v);
        }
    }
}

/// Haar-random unitary (orthogonal when `complex` is false): the polar factor
/// of a Ginibre matrix.
pub fn random_unitary(n: usize, complex: bool, rng: &mut InstanceRng) -> ComplexMatrix {
    loop {
        if let Ok(q) = orthonormalize_svd(&gaussian_matrix(n, n, complex, rng)) {
            return q.into_matrix();
        }
    }
}

/// V·diag(values)·V† with random eigenvectors.
pub fn with_spectrum(values: &[f64], complex: bool, rng: &mut InstanceRng) -> ComplexMatrix {
    let v = random_unitary(values.len(), complex, rng);
    let d = ComplexMatrix::diag(values);
    let a = v.matmul(&d).matmul(&v.adjoint());
    let n = values.len();
    // Remove the roundoff asymmetry left by the products.
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(a[(i, i)].re, 0.0)
        } else {
            0.5 * (a[(i, j)] + a[(j, i)].conj())
        }
    })
}

/// Dense complex hermitian matrix with Gaussian entries, (G + G†)/2.
pub fn random_hermitian(n: usize, rng: &mut InstanceRng) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, true, rng);
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(g[(i, i)].re, 0.0)
        } else {
            0.5 * (g[(i, j)] + g[(j, i)].conj())
        }
    })
}

/// Magnitudes spread over [0.5, 3] with gaps of at least 0.7·2.5/(n−1).
fn spaced_magnitudes(n: usize, rng: &mut InstanceRng) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 + 2.5 * rng.random::<f64>()];
    }
    let step = 2.5 / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let jitter = 0.3 * (rng.random::<f64>() - 0.5) * step;
            (0.5 + i as f64 * step + jitter).clamp(0.5, 3.0)
        })
        .collect()
}

/// Real symmetric positive-definite matrix, spectrum in [0.5, 3], well separated.
pub fn random_spd(n: usize, rng: &mut InstanceRng) -> ComplexMatrix {
    let values = spaced_magnitudes(n, rng);
    with_spectrum(&values, false, rng)
}

/// Complex hermitian matrix with eigenvalue magnitudes in [0.5, 3] and random signs.
pub fn random_nonsingular_hermitian(n: usize, rng: &mut InstanceRng) -> ComplexMatrix {
    let values: Vec<f64> = spaced_magnitudes(n, rng)
        .into_iter()
        .map(|e| if rng.random::<bool>() { e } else { -e })
        .collect();
    with_spectrum(&values, true, rng)
}

/// Real symmetric matrix with eigenvalues 0.75^i·(1 ± 0.1u), the spectral
/// shape of a smooth kernel matrix.
pub fn random_decaying_symmetric(n: usize, rng: &mut InstanceRng) -> ComplexMatrix {
    let values: Vec<f64> = (0..n)
        .map(|i| 0.75f64.powi(i as i32) * (1.0 + 0.1 * (2.0 * rng.random::<f64>() - 1.0)))
        .collect();
    with_spectrum(&values, false, rng)
}

/// Real symmetric matrix with eigenvalues 2^{−i}, i = 0..n.
pub fn geometric_spectrum(n: usize, rng: &mut InstanceRng) -> ComplexMatrix {
    let values: Vec<f64> = (0..n).map(|i| 0.5f64.powi(i as i32)).collect();
    with_spectrum(&values, false, rng)
}
