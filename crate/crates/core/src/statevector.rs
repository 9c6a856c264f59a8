//! Dense statevector simulator for a deviation register of m qubits and a
//! system register of n qubits.
//!
//! Amplitude index = ε·N + s, so the deviation register sits in the high bits
//! and every ε owns a contiguous block of N system amplitudes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::rng_from_seed;
use crate::numeric::{norm, ComplexMatrix, C64, ONE, ZERO};

/// Largest total qubit count the simulator accepts (2^26 amplitudes).
pub const MAX_QUBITS: u32 = 26;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    m: u32,
    n: u32,
}

impl RegisterLayout {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m < 1 || n < 1 || m + n > MAX_QUBITS {
            return Err(Error::InvalidLayout { m: m as usize, n: n as usize });
        }
        Ok(Self { m, n })
    }

    pub fn deviation_qubits(&self) -> u32 {
        self.m
    }

    pub fn system_qubits(&self) -> u32 {
        self.n
    }

    /// M = 2^m
    pub fn deviation_dim(&self) -> usize {
        1 << self.m
    }

    /// N = 2^n
    pub fn system_dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        1 << (self.m + self.n)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StateDump {
    m: u32,
    n: u32,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl StateVector {
    /// Computational basis state `index` (0 ≤ index < M·N).
    pub fn init_basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        if index >= layout.len() {
            return Err(Error::IndexOutOfRange {
                index,
                size: layout.len(),
            });
        }
        let mut amps = vec![ZERO; layout.len()];
        amps[index] = ONE;
        Ok(Self { layout, amps })
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                found: amps.len(),
            });
        }
        let nrm = norm(&amps);
        if (nrm - 1.0).abs() > NORM_TOL {
            return Err(Error::UnnormalizedTarget { norm: nrm });
        }
        Ok(Self { layout, amps })
    }

    /// |ε⟩ ⊗ |ψ⟩ for a deviation amplitude vector and a system vector.
    pub fn product(layout: RegisterLayout, deviation: &[C64], system: &[C64]) -> Result<Self> {
        if deviation.len() != layout.deviation_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.deviation_dim(),
                found: deviation.len(),
            });
        }
        if system.len() != layout.system_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.system_dim(),
                found: system.len(),
            });
        }
        let amps = deviation.iter().flat_map(|d| system.iter().map(move |s| d * s)).collect();
        Self::from_amplitudes(layout, amps)
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, eps: usize, sys: usize) -> C64 {
        self.amps[eps * self.layout.system_dim() + sys]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    fn blocks_mut(&mut self) -> std::slice::ChunksExactMut<'_, C64> {
        let n = self.layout.system_dim();
        self.amps.chunks_exact_mut(n)
    }

    /// Loads `v` into the system register, which must be in |0⟩^{⊗n}.
    pub fn prepare_system_state(mut self, v: &[C64]) -> Result<Self> {
        let n = self.layout.system_dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let excited = self.amps.chunks_exact(n).flat_map(|b| b[1..].iter()).any(|z| z.norm() > 1e-12);
        if excited {
            return Err(Error::NotInGroundRegister);
        }
        let gamma = PreparationUnitary::new(v)?;
        for block in self.blocks_mut() {
            let out = gamma.matrix.matvec(block);
            block.copy_from_slice(&out);
        }
        Ok(self)
    }

    /// H^{⊗m} on the deviation register.
    pub fn hadamard_deviation_register(mut self) -> Self {
        let n = self.layout.system_dim();
        let m_dim = self.layout.deviation_dim();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let mut bit = 1;
        while bit < m_dim {
            for eps in 0..m_dim {
                if eps & bit != 0 {
                    continue;
                }
                let (lo, hi) = (eps * n, (eps | bit) * n);
                for s in 0..n {
                    let (a, b) = (self.amps[lo + s], self.amps[hi + s]);
                    self.amps[lo + s] = h * (a + b);
                    self.amps[hi + s] = h * (a - b);
                }
            }
            bit <<= 1;
        }
        self
    }

    /// Σ_ε |ε⟩⟨ε| ⊗ U(ε)
    pub fn apply_controlled_family(mut self, family: &[ComplexMatrix]) -> Result<Self> {
        let m_dim = self.layout.deviation_dim();
        let n = self.layout.system_dim();
        if family.len() != m_dim {
            return Err(Error::FamilySizeMismatch {
                expected: m_dim,
                found: family.len(),
            });
        }
        for (index, u) in family.iter().enumerate() {
            if u.rows() != n || u.cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: u.rows(),
                });
            }
            let defect = u.unitarity_defect();
            if defect > 1e-10 * n as f64 {
                return Err(Error::NonUnitaryMember { index, defect });
            }
        }
        for (block, u) in self.blocks_mut().zip(family) {
            let out = u.matvec(block);
            block.copy_from_slice(&out);
        }
        Ok(self)
    }

    /// Inverse QFT on the deviation register, kernel e^{−2πi·jk/M}/√M.
    pub fn inverse_qft_deviation(self) -> Self {
        self.deviation_dft(-1.0)
    }

    /// Forward QFT on the deviation register, kernel e^{+2πi·jk/M}/√M.
    pub fn qft_deviation(self) -> Self {
        self.deviation_dft(1.0)
    }

    /// Direct M-point DFT over ε, applied to every system column.
    fn deviation_dft(mut self, sign: f64) -> Self {
        let m_dim = self.layout.deviation_dim();
        let n = self.layout.system_dim();
        let twiddle: Vec<C64> = (0..m_dim)
            .map(|r| C64::from_polar(1.0 / (m_dim as f64).sqrt(), sign * 2.0 * PI * r as f64 / m_dim as f64))
            .collect();
        let mut out = vec![ZERO; self.amps.len()];
        for j in 0..m_dim {
            for k in 0..m_dim {
                let w = twiddle[(j * k) % m_dim];
                let (dst, src) = (j * n, k * n);
                for s in 0..n {
                    out[dst + s] += w * self.amps[src + s];
                }
            }
        }
        self.amps = out;
        self
    }

    /// Marginal probabilities of the deviation register.
    pub fn deviation_distribution(&self) -> Vec<f64> {
        self.amps
            .chunks_exact(self.layout.system_dim())
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Multinomial draw of `shots` deviation outcomes (xoshiro256++ seeded by `seed`).
    pub fn sample_deviation(&self, seed: u64, shots: u64) -> Result<Vec<u64>> {
        sample_distribution(&self.deviation_distribution(), seed, shots)
    }

    pub fn to_json(&self) -> String {
        let dump = StateDump {
            m: self.layout.m,
            n: self.layout.n,
            re: self.amps.iter().map(|z| z.re).collect(),
            im: self.amps.iter().map(|z| z.im).collect(),
        };
        serde_json::to_string_pretty(&dump).expect("state serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: StateDump = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if dump.re.len() != dump.im.len() {
            return Err(Error::Parse("\"re\" and \"im\" lengths differ".into()));
        }
        let layout = RegisterLayout::new(dump.m, dump.n)?;
        let amps = dump.re.iter().zip(&dump.im).map(|(&r, &i)| C64::new(r, i)).collect();
        Self::from_amplitudes(layout, amps)
    }
}

/// Histogram of `shots` draws from `probs` (xoshiro256++ seeded by `seed`).
pub fn sample_distribution(probs: &[f64], seed: u64, shots: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last_nonzero = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = rng_from_seed(seed);
    let mut hist = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        let bin = cdf.partition_point(|&c| c <= u).min(last_nonzero);
        hist[bin] += 1;
    }
    Ok(hist)
}

/// Unitary Γ with Γ|0⟩ = v, built as a phased Householder reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationUnitary {
    matrix: ComplexMatrix,
}

impl PreparationUnitary {
    pub fn new(v: &[C64]) -> Result<Self> {
        let nrm = norm(v);
        if (nrm - 1.0).abs() > NORM_TOL {
            return Err(Error::UnnormalizedTarget { norm: nrm });
        }
        let n = v.len();
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
        // w = e^{-iφ} v has a real non-negative first entry; H = I − 2uu†/u†u
        // with u = e₀ − w maps e₀ to w.
        let w: Vec<C64> = v.iter().map(|z| z * phase.conj()).collect();
        let mut u: Vec<C64> = w.iter().map(|z| -z).collect();
        u[0] += ONE;
        let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let mut matrix = ComplexMatrix::identity(n).scale(phase);
        if uu > 1e-30 {
            let scale = phase * (-2.0 / uu);
            for i in 0..n {
                for j in 0..n {
                    matrix[(i, j)] += scale * u[i] * u[j].conj();
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_hermitian, random_state, random_unitary};
    use crate::numeric::presets::*;
    use crate::numeric::{eig_hermitian, unitary_phase_exp};
    use proptest::prelude::*;

    fn layout(m: u32, n: u32) -> RegisterLayout {
        RegisterLayout::new(m, n).unwrap()
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn random_sv(l: RegisterLayout, seed: u64) -> StateVector {
        let v = random_state(l.len(), true, &mut rng_from_seed(seed));
        StateVector::from_amplitudes(l, v).unwrap()
    }

    #[test]
    fn layout_guard() {
        assert!(RegisterLayout::new(0, 1).is_err());
        assert!(RegisterLayout::new(1, 0).is_err());
        assert!(RegisterLayout::new(13, 14).is_err());
        assert_eq!(layout(3, 2).len(), 32);
    }

    #[test]
    fn basis_states() {
        let s = StateVector::init_basis(layout(1, 1), 0).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let s = StateVector::init_basis(layout(2, 1), 3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[3], ONE);
        assert_eq!(s.norm(), 1.0);
        assert!(matches!(
            StateVector::init_basis(layout(1, 1), 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn prepare_plus_and_ry() {
        let s = StateVector::init_basis(layout(1, 1), 0).unwrap().prepare_system_state(&plus()).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!(close(&s.amplitudes()[..2], &[C64::new(h, 0.0), C64::new(h, 0.0)], 1e-15));

        let s = StateVector::init_basis(layout(1, 1), 0).unwrap().prepare_system_state(&basis(2, 0)).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);

        // R_y(θ)|0⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩ at θ = π/4
        let theta = PI / 4.0;
        let ry0 = [C64::new((theta / 2.0).cos(), 0.0), C64::new((theta / 2.0).sin(), 0.0)];
        let s = StateVector::init_basis(layout(1, 1), 0)
            .unwrap()
            .prepare_system_state(&hadamard_plus())
            .unwrap();
        assert!(close(&s.amplitudes()[..2], &ry0, 1e-15));
    }

    #[test]
    fn prepare_rejects_bad_input() {
        let s = StateVector::init_basis(layout(1, 1), 1).unwrap();
        assert!(matches!(s.prepare_system_state(&plus()), Err(Error::NotInGroundRegister)));
        let s = StateVector::init_basis(layout(1, 1), 0).unwrap();
        let bad = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(s.prepare_system_state(&bad), Err(Error::UnnormalizedTarget { .. })));
    }

    #[test]
    fn householder_completion_is_unitary_with_target_column() {
        let mut rng = rng_from_seed(8);
        for n in [1, 2, 3, 8, 16] {
            let v = random_state(n, true, &mut rng);
            let g = PreparationUnitary::new(&v).unwrap();
            assert!(g.matrix().unitarity_defect() <= 1e-10 * n as f64);
            assert!(close(&g.matrix().column(0), &v, 1e-14));
        }
        let phased = [ZERO, C64::new(0.0, 1.0)];
        assert!(close(&PreparationUnitary::new(&phased).unwrap().matrix().column(0), &phased, 1e-15));
    }

    #[test]
    fn hadamard_register_examples() {
        let psi = hadamard_minus();
        let s = StateVector::product(layout(1, 1), &basis(2, 0), &psi).unwrap();
        let out = s.clone().hadamard_deviation_register();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let want: Vec<C64> = [h, h].iter().flat_map(|d| psi.iter().map(move |p| d * p)).collect();
        assert!(close(out.amplitudes(), &want, 1e-15));
        assert!(close(out.hadamard_deviation_register().amplitudes(), s.amplitudes(), 1e-12));

        let s = StateVector::init_basis(layout(3, 1), 0).unwrap().hadamard_deviation_register();
        let d = s.deviation_distribution();
        assert!(d.iter().all(|p| (p - 0.125).abs() < 1e-15));
        for eps in 0..8 {
            assert!((s.amplitude(eps, 0).re - 8f64.sqrt().recip()).abs() < 1e-15);
        }
    }

    #[test]
    fn controlled_family_examples() {
        let l = layout(1, 1);
        let s = random_sv(l, 1);
        let same = s.clone().apply_controlled_family(&[ComplexMatrix::identity(2), ComplexMatrix::identity(2)]).unwrap();
        assert_eq!(same, s);

        let s = StateVector::init_basis(l, 2).unwrap(); // |1⟩|0⟩
        let out = s.apply_controlled_family(&[ComplexMatrix::identity(2), pauli_x()]).unwrap();
        assert_eq!(out.amplitudes(), &[ZERO, ZERO, ZERO, ONE]);

        let phi = 0.83;
        let psi = hadamard_plus();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let s = StateVector::product(l, &[h, h], &psi).unwrap();
        let kick = ComplexMatrix::identity(2).scale(C64::from_polar(1.0, phi));
        let out = s.apply_controlled_family(&[ComplexMatrix::identity(2), kick]).unwrap();
        let e = C64::from_polar(1.0, phi);
        let want = [h * psi[0], h * psi[1], h * e * psi[0], h * e * psi[1]];
        assert!(close(out.amplitudes(), &want, 1e-15));
    }

    #[test]
    fn controlled_family_validation() {
        let s = StateVector::init_basis(layout(1, 1), 0).unwrap();
        assert!(matches!(
            s.clone().apply_controlled_family(&[ComplexMatrix::identity(2)]),
            Err(Error::FamilySizeMismatch { .. })
        ));
        let bad = ComplexMatrix::diag(&[1.0, 2.0]);
        assert!(matches!(
            s.apply_controlled_family(&[ComplexMatrix::identity(2), bad]),
            Err(Error::NonUnitaryMember { index: 1, .. })
        ));
    }

    #[test]
    fn identical_family_acts_as_tensor_product() {
        let mut rng = rng_from_seed(12);
        for (m, n) in [(1u32, 1u32), (2, 2), (3, 3), (1, 5), (4, 2)] {
            let l = layout(m, n);
            let u = random_unitary(l.system_dim(), true, &mut rng);
            let s = random_sv(l, m as u64 * 10 + n as u64);
            let out = s.clone().apply_controlled_family(&vec![u.clone(); l.deviation_dim()]).unwrap();
            // (I_M ⊗ U) as an explicit matrix
            let big = ComplexMatrix::from_fn(l.len(), l.len(), |r, c| {
                let (nd, ns) = (l.system_dim(), l.system_dim());
                if r / nd == c / nd {
                    u[(r % ns, c % ns)]
                } else {
                    ZERO
                }
            });
            assert!(close(out.amplitudes(), &big.matvec(s.amplitudes()), 1e-12));
        }
    }

    #[test]
    fn inverse_qft_examples() {
        let l = layout(3, 1);
        let s = StateVector::init_basis(l, 0).unwrap().hadamard_deviation_register().inverse_qft_deviation();
        assert!((s.deviation_distribution()[0] - 1.0).abs() < 1e-12);

        let m_dim = 8;
        for j0 in 0..m_dim {
            let dev: Vec<C64> = (0..m_dim)
                .map(|e| C64::from_polar((m_dim as f64).sqrt().recip(), 2.0 * PI * (e * j0) as f64 / m_dim as f64))
                .collect();
            let s = StateVector::product(l, &dev, &basis(2, 1)).unwrap().inverse_qft_deviation();
            let d = s.deviation_distribution();
            assert!((d[j0] - 1.0).abs() < 1e-12, "j0 = {j0}");
        }

        let h = FRAC_1_SQRT_2;
        let s = StateVector::product(layout(1, 1), &[C64::new(h, 0.0), C64::new(-h, 0.0)], &basis(2, 0))
            .unwrap()
            .inverse_qft_deviation();
        assert!((s.amplitude(1, 0) - ONE).norm() < 1e-15);
    }

    #[test]
    fn distributions() {
        let s = StateVector::product(layout(2, 1), &basis(4, 2), &plus()).unwrap();
        let d = s.deviation_distribution();
        assert!(d.iter().zip([0.0, 0.0, 1.0, 0.0]).all(|(x, y)| (x - y).abs() < 1e-15));
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        // (|0⟩|0⟩ + |1⟩|1⟩)/√2
        let bell = StateVector::from_amplitudes(layout(1, 1), vec![h, ZERO, ZERO, h]).unwrap();
        let d = bell.deviation_distribution();
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampling() {
        let s = StateVector::product(layout(2, 1), &basis(4, 3), &plus()).unwrap();
        assert_eq!(s.sample_deviation(5, 1000).unwrap(), vec![0, 0, 0, 1000]);

        let s = StateVector::init_basis(layout(1, 1), 0).unwrap().hadamard_deviation_register();
        let shots = 1_000_000;
        let hist = s.sample_deviation(99, shots).unwrap();
        assert_eq!(hist.iter().sum::<u64>(), shots);
        for &h in &hist {
            assert!((h as f64 / shots as f64 - 0.5).abs() <= 0.002);
        }
        assert_eq!(hist, s.sample_deviation(99, shots).unwrap());
        assert!(s.sample_deviation(1, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = random_sv(layout(2, 1), 4);
        let back = StateVector::from_json(&s.to_json()).unwrap();
        assert!(close(back.amplitudes(), s.amplitudes(), 1e-15));
    }

    /// Closed-form m = n = 1 circuit: c₀ = α(1 + e^{iφ})/2, c₁ = α(1 − e^{iφ})/2
    /// where φ is the relative eigenphase between the two family members.
    #[test]
    fn two_qubit_circuit_matches_closed_form() {
        let mut rng = rng_from_seed(31);
        for _ in 0..20 {
            let x = random_hermitian(2, &mut rng);
            let delta = random_hermitian(2, &mut rng);
            // make Δ commute with X so the eigenvector is shared
            let eig = eig_hermitian(&x).unwrap();
            let d = crate::numeric::dot(&eig.vector(0), &delta.matvec(&eig.vector(0))).re;
            let delta_c = eig.map(|e| C64::new(if e == eig.values[0] { d } else { -0.3 }, 0.0));
            let t = 1.7;
            let s_eps = 0.4;
            let fam = vec![
                unitary_phase_exp(&x, t).unwrap(),
                unitary_phase_exp(&(&x + &delta_c.scale_real(s_eps)), t).unwrap(),
            ];
            let p = eig.vector(0);
            let out = StateVector::init_basis(layout(1, 1), 0)
                .unwrap()
                .prepare_system_state(&p)
                .unwrap()
                .hadamard_deviation_register()
                .apply_controlled_family(&fam)
                .unwrap()
                .inverse_qft_deviation();
            let alpha = C64::from_polar(1.0, t * eig.values[0]);
            let kick = C64::from_polar(1.0, t * s_eps * d);
            let c0 = alpha * (ONE + kick) * 0.5;
            let c1 = alpha * (ONE - kick) * 0.5;
            for sys in 0..2 {
                assert!((out.amplitude(0, sys) - c0 * p[sys]).norm() < 1e-10);
                assert!((out.amplitude(1, sys) - c1 * p[sys]).norm() < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(seed in any::<u64>(), m in 1u32..4, n in 1u32..4) {
            let l = layout(m, n);
            let s = random_sv(l, seed);
            let mut rng = rng_from_seed(seed ^ 0xabcdef);
            let fam: Vec<ComplexMatrix> = (0..l.deviation_dim())
                .map(|_| random_unitary(l.system_dim(), true, &mut rng))
                .collect();
            let s = s.hadamard_deviation_register();
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
            let s = s.apply_controlled_family(&fam).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
            let s = s.inverse_qft_deviation();
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
            let total: f64 = s.deviation_distribution().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }

        #[test]
        fn qft_round_trip(seed in any::<u64>(), m in 1u32..7, n in 1u32..3) {
            let s = random_sv(layout(m, n), seed);
            let back = s.clone().inverse_qft_deviation().qft_deviation();
            prop_assert!(close(back.amplitudes(), s.amplitudes(), 1e-10));
        }
    }
}
