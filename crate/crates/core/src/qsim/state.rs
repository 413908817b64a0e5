use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::gate::GateMatrix;
use super::{check_targets, Gate, SimError, MAX_QUBITS, STATE_TOL};
use crate::pauli::PauliString;

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Amplitudes, length `2^n`.
    Pure(Vec<C64>),
    /// Row-major density operator, length `4^n`.
    Mixed(Vec<C64>),
}

/// State of an `n`-qubit register (see the module docs for bit ordering).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    repr: Representation,
    labels: Vec<String>,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|q| format!("q{q}")).collect()
}

fn check_size(n: usize) -> Result<(), SimError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(SimError::UnsupportedSize(n));
    }
    Ok(())
}

impl QuantumState {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        check_size(num_qubits)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits, repr: Representation::Pure(amps), labels: default_labels(num_qubits) })
    }

    /// Computational basis state with the given index.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        let mut s = Self::zero(num_qubits)?;
        if index >= 1 << num_qubits {
            return Err(SimError::BadDimension { len: index, what: "basis index" });
        }
        if let Representation::Pure(a) = &mut s.repr {
            a[0] = C64::new(0.0, 0.0);
            a[index] = C64::new(1.0, 0.0);
        }
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self, SimError> {
        let n = dim_to_qubits(amps.len()).ok_or(SimError::BadDimension {
            len: amps.len(),
            what: "amplitude vector",
        })?;
        check_size(n)?;
        let s = Self { num_qubits: n, repr: Representation::Pure(amps), labels: default_labels(n) };
        s.check_normalized()?;
        Ok(s)
    }

    /// Validates all density-operator invariants.
    pub fn from_density(rho: Vec<C64>) -> Result<Self, SimError> {
        let n = dim_to_qubits(rho.len())
            .filter(|n| n % 2 == 0)
            .map(|n| n / 2)
            .ok_or(SimError::BadDimension { len: rho.len(), what: "density matrix" })?;
        check_size(n)?;
        let s = Self { num_qubits: n, repr: Representation::Mixed(rho), labels: default_labels(n) };
        s.validate()?;
        Ok(s)
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        assert_eq!(labels.len(), self.num_qubits, "one label per qubit");
        self.labels = labels;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Position of a labelled qubit.
    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_pure_representation(&self) -> bool {
        matches!(self.repr, Representation::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&[C64]> {
        match &self.repr {
            Representation::Pure(a) => Some(a),
            Representation::Mixed(_) => None,
        }
    }

    /// Row-major density operator (built from the amplitudes if pure).
    pub fn density_matrix(&self) -> Vec<C64> {
        match &self.repr {
            Representation::Mixed(rho) => rho.clone(),
            Representation::Pure(a) => {
                let d = a.len();
                let mut rho = vec![C64::new(0.0, 0.0); d * d];
                for i in 0..d {
                    if a[i] == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in 0..d {
                        rho[i * d + j] = a[i] * a[j].conj();
                    }
                }
                rho
            }
        }
    }

    /// Switches to the density-operator representation.
    pub fn into_mixed(self) -> Self {
        match self.repr {
            Representation::Mixed(_) => self,
            Representation::Pure(_) => {
                let rho = self.density_matrix();
                Self { num_qubits: self.num_qubits, repr: Representation::Mixed(rho), labels: self.labels }
            }
        }
    }

    pub(crate) fn mixed_mut(&mut self) -> &mut Vec<C64> {
        if self.is_pure_representation() {
            let taken = std::mem::replace(&mut self.repr, Representation::Mixed(Vec::new()));
            if let Representation::Pure(a) = taken {
                let tmp = Self { num_qubits: self.num_qubits, repr: Representation::Pure(a), labels: Vec::new() };
                self.repr = Representation::Mixed(tmp.density_matrix());
            }
        }
        match &mut self.repr {
            Representation::Mixed(rho) => rho,
            Representation::Pure(_) => unreachable!(),
        }
    }

    pub(crate) fn set_repr(&mut self, repr: Representation) {
        self.repr = repr;
    }

    /// Norm squared (pure) or trace (mixed).
    pub fn trace(&self) -> f64 {
        match &self.repr {
            Representation::Pure(a) => a.iter().map(|x| x.norm_sqr()).sum(),
            Representation::Mixed(rho) => {
                let d = self.dim();
                (0..d).map(|i| rho[i * d + i].re).sum()
            }
        }
    }

    pub fn check_normalized(&self) -> Result<(), SimError> {
        let t = self.trace();
        if (t - 1.0).abs() > STATE_TOL {
            return Err(SimError::NotNormalized(t));
        }
        Ok(())
    }

    /// Full invariant check: normalization, and for density operators
    /// Hermiticity and positivity.
    pub fn validate(&self) -> Result<(), SimError> {
        self.check_normalized()?;
        if let Representation::Mixed(rho) = &self.repr {
            let d = self.dim();
            let mut dev = 0.0f64;
            for i in 0..d {
                for j in i..d {
                    dev = dev.max((rho[i * d + j] - rho[j * d + i].conj()).norm());
                }
            }
            if dev > STATE_TOL {
                return Err(SimError::NotHermitian(dev));
            }
            let min = self.min_eigenvalue();
            if min < -1e-9 {
                return Err(SimError::NegativeEigenvalue(min));
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue of the density operator (0 for a pure state).
    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            Representation::Pure(_) => 0.0,
            Representation::Mixed(rho) => {
                let d = self.dim();
                let m = DMatrix::from_row_slice(d, d, rho);
                let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
                m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        match &self.repr {
            Representation::Pure(a) => {
                let n: f64 = a.iter().map(|x| x.norm_sqr()).sum();
                n * n
            }
            Representation::Mixed(rho) => rho.iter().map(|x| x.norm_sqr()).sum(),
        }
    }

    /// `<phi| rho |phi>` for a pure reference state.
    pub fn fidelity_with_pure(&self, phi: &[C64]) -> f64 {
        assert_eq!(phi.len(), self.dim(), "reference dimension mismatch");
        match &self.repr {
            Representation::Pure(a) => {
                let ov: C64 = phi.iter().zip(a).map(|(p, x)| p.conj() * x).sum();
                ov.norm_sqr()
            }
            Representation::Mixed(rho) => {
                let d = self.dim();
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..d {
                    for j in 0..d {
                        acc += phi[i].conj() * rho[i * d + j] * phi[j];
                    }
                }
                acc.re
            }
        }
    }

    /// Reduced density operator on `keep` (in the given order).
    pub fn reduced(&self, keep: &[usize]) -> Result<QuantumState, SimError> {
        check_targets(keep, self.num_qubits)?;
        check_size(keep.len())?;
        let n = self.num_qubits;
        let k = keep.len();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let kd = 1usize << k;
        let td = 1usize << traced.len();
        let compose = |kept: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                if kept >> (k - 1 - pos) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if env >> (traced.len() - 1 - pos) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            idx
        };
        let mut out = vec![C64::new(0.0, 0.0); kd * kd];
        let d = self.dim();
        for e in 0..td {
            for i in 0..kd {
                let gi = compose(i, e);
                for j in 0..kd {
                    let gj = compose(j, e);
                    out[i * kd + j] += match &self.repr {
                        Representation::Pure(a) => a[gi] * a[gj].conj(),
                        Representation::Mixed(rho) => rho[gi * d + gj],
                    };
                }
            }
        }
        let labels = keep.iter().map(|&q| self.labels[q].clone()).collect();
        Ok(QuantumState { num_qubits: k, repr: Representation::Mixed(out), labels })
    }

    /// Applies a gate in place.
    ///
    /// Fails on out-of-range or repeated targets and on unnormalized input.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        self.check_normalized()?;
        let qs = gate.qubits();
        match gate.matrix() {
            GateMatrix::One(m) => self.apply_one_unchecked(qs[0], &m),
            GateMatrix::Two(m) => self.apply_two_unchecked(qs[0], qs[1], &m),
        }
        Ok(())
    }

    pub fn apply_gates<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<(), SimError> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Applies a single-qubit operator `m` (row-major 2x2) as `m rho m^dagger`.
    /// `m` need not be unitary.
    pub(crate) fn apply_one_unchecked(&mut self, q: usize, m: &[C64; 4]) {
        let n = self.num_qubits;
        match &mut self.repr {
            Representation::Pure(a) => kernel_one(a, n, q, m),
            Representation::Mixed(rho) => {
                kernel_one(rho, 2 * n, q, m);
                let mc = m.map(|x| x.conj());
                kernel_one(rho, 2 * n, n + q, &mc);
            }
        }
    }

    pub(crate) fn apply_two_unchecked(&mut self, q0: usize, q1: usize, m: &[C64; 16]) {
        let n = self.num_qubits;
        match &mut self.repr {
            Representation::Pure(a) => kernel_two(a, n, q0, q1, m),
            Representation::Mixed(rho) => {
                kernel_two(rho, 2 * n, q0, q1, m);
                let mc = m.map(|x| x.conj());
                kernel_two(rho, 2 * n, n + q0, n + q1, &mc);
            }
        }
    }

    /// Exact `<P>` for a Pauli string over the whole register.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64, SimError> {
        if pauli.len() != self.num_qubits {
            return Err(SimError::PauliLength { expected: self.num_qubits, got: pauli.len() });
        }
        let (x, z) = pauli.masks();
        // P|j> = i^{#Y} (-1)^{|j & z|} |j ^ x>
        let y_phase = match pauli.count_y() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d {
            let sign = if (j & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let term = match &self.repr {
                Representation::Pure(a) => a[j ^ x].conj() * a[j],
                Representation::Mixed(rho) => rho[j * d + (j ^ x)],
            };
            acc += term * sign;
        }
        Ok((acc * y_phase).re)
    }

    /// Computational-basis probabilities of the whole register.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Pure(a) => a.iter().map(|x| x.norm_sqr()).collect(),
            Representation::Mixed(rho) => {
                let d = self.dim();
                (0..d).map(|i| rho[i * d + i].re).collect()
            }
        }
    }
}

fn dim_to_qubits(len: usize) -> Option<usize> {
    if len >= 2 && len.is_power_of_two() {
        Some(len.trailing_zeros() as usize)
    } else {
        None
    }
}

/// `m` on position `pos` of a `total`-qubit vector.
fn kernel_one(v: &mut [C64], total: usize, pos: usize, m: &[C64; 4]) {
    let bit = 1usize << (total - 1 - pos);
    for i in 0..v.len() {
        if i & bit != 0 {
            continue;
        }
        let a = v[i];
        let b = v[i | bit];
        v[i] = m[0] * a + m[1] * b;
        v[i | bit] = m[2] * a + m[3] * b;
    }
}

/// `m` on positions `(p0, p1)` of a `total`-qubit vector; `p0` is the high local bit.
fn kernel_two(v: &mut [C64], total: usize, p0: usize, p1: usize, m: &[C64; 16]) {
    let b0 = 1usize << (total - 1 - p0);
    let b1 = 1usize << (total - 1 - p1);
    for i in 0..v.len() {
        if i & (b0 | b1) != 0 {
            continue;
        }
        let idx = [i, i | b1, i | b0, i | b0 | b1];
        let old = [v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]];
        for r in 0..4 {
            v[idx[r]] = m[r * 4] * old[0] + m[r * 4 + 1] * old[1] + m[r * 4 + 2] * old[2] + m[r * 4 + 3] * old[3];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = QuantumState::zero(1).unwrap();
        s.apply_gate(&Gate::H { qubit: 0 }).unwrap();
        let a = s.amplitudes().unwrap();
        assert!((a[0] - c(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((a[1] - c(FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn big_endian_ordering() {
        let mut s = QuantumState::zero(3).unwrap();
        s.apply_gate(&Gate::X { qubit: 0 }).unwrap();
        assert!((s.probabilities()[0b100] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn controlled_u_at_right_angle_is_cnot() {
        for idx in 0..4 {
            let mut a = QuantumState::basis(2, idx).unwrap();
            let mut b = a.clone();
            a.apply_gate(&Gate::Cu { control: 0, target: 1, alpha: FRAC_PI_2 }).unwrap();
            b.apply_gate(&Gate::Cnot { control: 0, target: 1 }).unwrap();
            assert!(a.fidelity_with_pure(b.amplitudes().unwrap()) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn ms_makes_bell_pair() {
        let mut s = QuantumState::zero(2).unwrap();
        s.apply_gate(&Gate::Ms { a: 0, b: 1, theta: -FRAC_PI_2 }).unwrap();
        let p = s.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_and_mixed_paths_agree() {
        let gates = [
            Gate::H { qubit: 0 },
            Gate::Ry { qubit: 2, theta: 0.3 },
            Gate::Cnot { control: 0, target: 2 },
            Gate::Ms { a: 1, b: 2, theta: 0.7 },
            Gate::Rz { qubit: 1, theta: PI / 3.0 },
        ];
        let mut p = QuantumState::zero(3).unwrap();
        let mut m = QuantumState::zero(3).unwrap().into_mixed();
        p.apply_gates(&gates).unwrap();
        m.apply_gates(&gates).unwrap();
        let rp = p.density_matrix();
        let rm = m.density_matrix();
        let diff = rp.iter().zip(&rm).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
        for s in ["ZIZ", "XYZ", "IXX", "YYI"] {
            let ps: PauliString = s.parse().unwrap();
            assert!((p.expectation(&ps).unwrap() - m.expectation(&ps).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_targets_and_unnormalized_input() {
        let mut s = QuantumState::zero(2).unwrap();
        assert!(s.apply_gate(&Gate::H { qubit: 2 }).is_err());
        assert!(s.apply_gate(&Gate::Cnot { control: 1, target: 1 }).is_err());
        let mut bad = QuantumState::zero(1).unwrap();
        bad.set_repr(Representation::Pure(vec![c(1.0), c(1.0)]));
        assert!(matches!(bad.apply_gate(&Gate::X { qubit: 0 }), Err(SimError::NotNormalized(_))));
    }

    #[test]
    fn reduced_state_of_bell_pair_is_maximally_mixed() {
        let mut s = QuantumState::zero(2).unwrap();
        s.apply_gate(&Gate::H { qubit: 0 }).unwrap();
        s.apply_gate(&Gate::Cnot { control: 0, target: 1 }).unwrap();
        let r = s.reduced(&[1]).unwrap();
        assert!((r.purity() - 0.5).abs() < 1e-12);
    }
}
