//! Dense statevector engine.
//!
//! Amplitudes live in a flat `Vec` indexed by bitstring, with qubit 0 as the
//! least-significant bit. All gates act in place; global phase is not tracked.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{check_edge, Edge, Observable, Pauli, PauliString};

/// Largest register the engine will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// Largest observable [`exact_ground_energy`] will densify.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Rotation axis for the single-qubit gates used by the ansatz.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn generator(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector is
    /// taken as given, without normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        Ok(Self { n_qubits, amps })
    }

    /// Resets to `|0…0⟩` without reallocating.
    pub fn reset(&mut self) {
        self.amps.fill(ZERO);
        self.amps[0] = Complex64::new(1.0, 0.0);
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_size(other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn check_same_size(&self, n_qubits: usize) -> Result<()> {
        if n_qubits != self.n_qubits {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits,
                actual: n_qubits,
            });
        }
        Ok(())
    }

    /// Applies `exp(-i·angle·G/2)` with `G` the axis Pauli.
    pub fn apply_rotation(&mut self, axis: Axis, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        self.rotate(axis, qubit, angle);
        Ok(())
    }

    pub(crate) fn rotate(&mut self, axis: Axis, qubit: usize, angle: f64) {
        let (s, c) = (angle * 0.5).sin_cos();
        let stride = 1usize << qubit;
        match axis {
            // [[c, -is], [-is, c]]
            Axis::X => {
                let mis = Complex64::new(0.0, -s);
                for_each_pair(&mut self.amps, stride, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c + x1 * mis;
                    *a1 = x0 * mis + x1 * c;
                });
            }
            // [[c, -s], [s, c]]
            Axis::Y => {
                for_each_pair(&mut self.amps, stride, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c - x1 * s;
                    *a1 = x0 * s + x1 * c;
                });
            }
        }
    }

    /// `⟨self|G_q|other⟩` for the rotation generator of `axis` on `qubit`,
    /// without materializing `G_q|other⟩`.
    pub(crate) fn generator_overlap(&self, other: &StateVector, axis: Axis, qubit: usize) -> Complex64 {
        let stride = 1usize << qubit;
        let mut acc = ZERO;
        for base in (0..self.amps.len()).step_by(2 * stride) {
            for i0 in base..base + stride {
                let i1 = i0 + stride;
                let (l0, l1) = (self.amps[i0].conj(), self.amps[i1].conj());
                let (p0, p1) = (other.amps[i0], other.amps[i1]);
                acc += match axis {
                    Axis::X => l0 * p1 + l1 * p0,
                    Axis::Y => Complex64::new(0.0, 1.0) * (l1 * p0 - l0 * p1),
                };
            }
        }
        acc
    }

    pub fn apply_cz(&mut self, edge: Edge) -> Result<()> {
        check_edge(edge, self.n_qubits)?;
        self.cz(edge);
        Ok(())
    }

    pub(crate) fn cz(&mut self, (a, b): Edge) {
        let mask = (1usize << a) | (1usize << b);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Applies one CZ per edge. Edges are validated before any gate runs.
    pub fn apply_cz_layer(&mut self, edges: &[Edge]) -> Result<()> {
        for &edge in edges {
            check_edge(edge, self.n_qubits)?;
        }
        for &edge in edges {
            self.cz(edge);
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩` including the string's sign.
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        self.check_same_size(p.n_qubits())?;
        let masks = PauliMasks::of(p);
        let mut acc = 0.0;
        for (idx, amp) in self.amps.iter().enumerate() {
            let partner = self.amps[idx ^ masks.x];
            acc += (partner.conj() * amp * masks.phase(idx)).re;
        }
        Ok(p.sign() * acc)
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        self.check_same_size(obs.n_qubits())?;
        obs.terms()
            .iter()
            .map(|t| self.expectation_pauli(&t.string).map(|e| t.coeff * e))
            .sum()
    }

    /// `O|ψ⟩` as a new (unnormalized) vector.
    pub fn apply_observable(&self, obs: &Observable) -> Result<StateVector> {
        self.check_same_size(obs.n_qubits())?;
        let mut out = vec![ZERO; self.amps.len()];
        for t in obs.terms() {
            let masks = PauliMasks::of(&t.string);
            for (idx, amp) in self.amps.iter().enumerate() {
                out[idx ^ masks.x] += amp * masks.phase(idx) * t.coeff;
            }
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            n_qubits,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Visits every amplitude pair that differs only in the bit `stride`.
#[inline]
fn for_each_pair(amps: &mut [Complex64], stride: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

/// Bit masks for applying a Pauli word to basis states:
/// `P|i⟩ = i^{#Y} · (-1)^{|i & z|} · |i ⊕ x⟩`.
struct PauliMasks {
    x: usize,
    z: usize,
    y_phase: Complex64,
}

impl PauliMasks {
    fn of(p: &PauliString) -> Self {
        let (mut x, mut z, mut n_y) = (0usize, 0usize, 0u32);
        for (q, &pauli) in p.word().iter().enumerate() {
            match pauli {
                Pauli::I => {}
                Pauli::X => x |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => z |= 1 << q,
            }
        }
        let y_phase = Complex64::new(0.0, 1.0).powu(n_y);
        Self { x, z, y_phase }
    }

    #[inline]
    fn phase(&self, idx: usize) -> Complex64 {
        if (idx & self.z).count_ones() & 1 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }
}

/// Dense `2^N × 2^N` matrix of an observable.
pub fn dense_matrix(obs: &Observable) -> Result<DMatrix<Complex64>> {
    let n = obs.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            n_qubits: n,
            cap: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for t in obs.terms() {
        let masks = PauliMasks::of(&t.string);
        for col in 0..dim {
            m[(col ^ masks.x, col)] += masks.phase(col) * t.coeff;
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of the observable, by dense Hermitian diagonalization.
pub fn exact_ground_energy(obs: &Observable) -> Result<f64> {
    let m = dense_matrix(obs)?;
    let eig = m.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{cz_conjugate, Pauli};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
        let amps = (0..1 << n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.normalize();
        s
    }

    #[test]
    fn zero_state() {
        assert_eq!(StateVector::zero(1).unwrap().amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(StateVector::zero(2).unwrap().amplitudes()[0], c(1.0, 0.0));
        assert!(matches!(StateVector::zero(25), Err(Error::Capacity { .. })));
        assert!(StateVector::zero(0).is_err());
    }

    #[test]
    fn rotation_examples() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rotation(Axis::Y, 0, PI).unwrap();
        assert!(close(s.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)], 1e-15));

        let mut r = random_state(3, &mut ChaCha8Rng::seed_from_u64(1));
        let before = r.clone();
        r.apply_rotation(Axis::X, 1, 0.0).unwrap();
        assert_eq!(r, before);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_rotation(Axis::Y, 0, PI / 2.0).unwrap();
        assert!(close(s.amplitudes(), &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-15));

        assert!(s.apply_rotation(Axis::X, 1, 0.3).is_err());
    }

    #[test]
    fn rotation_matches_two_by_two_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for axis in [Axis::X, Axis::Y] {
            let theta: f64 = rng.random_range(-PI..PI);
            let g = axis.generator().matrix();
            let (s, co) = (theta / 2.0).sin_cos();
            // exp(-iθG/2) = cos I - i sin G
            let u = |r: usize, col: usize| {
                let id = if r == col { co } else { 0.0 };
                c(id, 0.0) - c(0.0, s) * g[r][col]
            };
            let mut st = random_state(1, &mut rng);
            let a = st.amplitudes().to_vec();
            let want = [u(0, 0) * a[0] + u(0, 1) * a[1], u(1, 0) * a[0] + u(1, 1) * a[1]];
            st.apply_rotation(axis, 0, theta).unwrap();
            assert!(close(st.amplitudes(), &want, 1e-14));
        }
    }

    #[test]
    fn cz_examples() {
        let basis = |k: usize| {
            let mut v = vec![c(0.0, 0.0); 4];
            v[k] = c(1.0, 0.0);
            StateVector::from_amplitudes(v).unwrap()
        };
        let mut s = basis(3);
        s.apply_cz_layer(&[(0, 1)]).unwrap();
        assert_eq!(s.amplitudes()[3], c(-1.0, 0.0));
        let mut s = basis(1);
        s.apply_cz_layer(&[(0, 1)]).unwrap();
        assert_eq!(s, basis(1));
        let h = FRAC_1_SQRT_2;
        let mut bell = StateVector::from_amplitudes(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap();
        bell.apply_cz_layer(&[(0, 1)]).unwrap();
        assert_eq!(bell.amplitudes(), &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-h, 0.0)]);
        assert!(bell.apply_cz_layer(&[(0, 2)]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let s = StateVector::zero(2).unwrap();
        let zz = Observable::from_words(2, &[(1.0, "ZZ")]).unwrap();
        assert_eq!(s.expectation(&zz).unwrap(), 1.0);
        let x = Observable::from_words(1, &[(1.0, "X")]).unwrap();
        assert_eq!(StateVector::zero(1).unwrap().expectation(&x).unwrap(), 0.0);
        let tfim = Observable::from_words(2, &[(1.0, "ZZ"), (-1.0, "XI"), (-1.0, "IX")]).unwrap();
        assert_eq!(s.expectation(&tfim).unwrap(), 1.0);
        assert!(s.expectation(&x).is_err());
    }

    #[test]
    fn expectation_matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let obs = Observable::from_words(3, &[(0.7, "XYZ"), (-1.2, "YIY"), (0.3, "IZX")]).unwrap();
        let m = dense_matrix(&obs).unwrap();
        let s = random_state(3, &mut rng);
        let v = nalgebra::DVector::from_vec(s.amplitudes().to_vec());
        let dense = (v.adjoint() * &m * &v)[(0, 0)];
        assert!((dense.re - s.expectation(&obs).unwrap()).abs() < 1e-12);
        assert!(dense.im.abs() < 1e-12);
        let applied = s.apply_observable(&obs).unwrap();
        assert!((s.inner(&applied).unwrap() - dense).norm() < 1e-12);
    }

    #[test]
    fn ground_energies() {
        let minus_x = Observable::from_words(1, &[(-1.0, "X")]).unwrap();
        assert!((exact_ground_energy(&minus_x).unwrap() + 1.0).abs() < 1e-12);
        let tfim = Observable::from_words(2, &[(1.0, "ZZ"), (-1.0, "XI"), (-1.0, "IX")]).unwrap();
        assert!((exact_ground_energy(&tfim).unwrap() + 5f64.sqrt()).abs() < 1e-10);
        let scalar = Observable::from_words(2, &[(3.0, "II")]).unwrap();
        assert!((exact_ground_energy(&scalar).unwrap() - 3.0).abs() < 1e-12);
        let big = Observable::from_words(13, &[(1.0, "ZIIIIIIIIIIII")]).unwrap();
        assert!(matches!(exact_ground_energy(&big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn norm_preserved_over_random_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            let mut s = random_state(n, &mut rng);
            for _ in 0..100 {
                let q = rng.random_range(0..n);
                match rng.random_range(0..3) {
                    0 => s.apply_rotation(Axis::X, q, rng.random_range(-PI..PI)).unwrap(),
                    1 => s.apply_rotation(Axis::Y, q, rng.random_range(-PI..PI)).unwrap(),
                    _ if n > 1 => {
                        let r = (q + 1 + rng.random_range(0..n - 1)) % n;
                        s.apply_cz((q, r)).unwrap();
                    }
                    _ => {}
                }
            }
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn heisenberg_matches_schroedinger_for_cz() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let psi = random_state(2, &mut rng);
            let mut evolved = psi.clone();
            evolved.apply_cz((0, 1)).unwrap();
            for a in Pauli::ALL {
                for b in Pauli::ALL {
                    let p = PauliString::new(vec![a, b]);
                    let heis = psi.expectation_pauli(&cz_conjugate(&p, (0, 1)).unwrap()).unwrap();
                    let schr = evolved.expectation_pauli(&p).unwrap();
                    assert!((heis - schr).abs() < 1e-10, "{p}");
                }
            }
        }
    }

    #[test]
    fn expectation_linear_in_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_state(3, &mut rng);
        let a = Observable::from_words(3, &[(0.4, "XZY"), (1.3, "ZZI")]).unwrap();
        let scaled = a.scaled(-2.5).unwrap();
        let lhs = s.expectation(&scaled).unwrap();
        assert!((lhs + 2.5 * s.expectation(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rotation_of_anticommuting_observable() {
        // R(θ)† O R(θ) = cosθ O + sinθ (iGO) for {O, G} = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cases = [(Axis::Y, "X", "Z"), (Axis::Y, "Z", "X"), (Axis::X, "Z", "Y"), (Axis::X, "Y", "Z")];
        // iGO as a signed word: iYX = Z, iYZ = -X, iXZ = Y, iXY = -Z.
        let igo_sign = [1.0, -1.0, 1.0, -1.0];
        for ((axis, o, igo), sign) in cases.into_iter().zip(igo_sign) {
            let psi = random_state(1, &mut rng);
            let theta: f64 = rng.random_range(-PI..PI);
            let mut rotated = psi.clone();
            rotated.apply_rotation(axis, 0, theta).unwrap();
            let o = PauliString::parse(o, 1).unwrap();
            let igo = PauliString::with_sign(PauliString::parse(igo, 1).unwrap().word().to_vec(), sign);
            let lhs = rotated.expectation_pauli(&o).unwrap();
            let rhs = theta.cos() * psi.expectation_pauli(&o).unwrap()
                + theta.sin() * psi.expectation_pauli(&igo).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
