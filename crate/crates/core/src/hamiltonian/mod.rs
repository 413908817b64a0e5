//! Pauli-sum Hamiltonians over {I, X, Z}, clock constructions and the
//! one-gate decision problem.

mod clock;
mod problem;

pub use clock::{
    build_fixed_h, build_general_h, build_general_parts, clock_state, eta_state, fixed_parts, gray, ClockCircuit,
    ClockGate, HamiltonianParts, DEFAULT_J_IN, DEFAULT_J_PROP,
};
pub use problem::{DecisionProblem, Variant, REFUTE_THRESHOLD, VERIFY_THRESHOLD};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::pauli::{Pauli, PauliString};
use crate::qsim::{QuantumState, SimError, MAX_QUBITS};

/// Coefficients below this magnitude are dropped after merging.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("Y factors are not allowed in XZ-type Hamiltonians ({0})")]
    YFactor(PauliString),
    #[error("term {pauli} has length {got}, expected {expected}")]
    Length { pauli: PauliString, expected: usize, got: usize },
    #[error("non-finite coefficient {0}")]
    NonFinite(f64),
    #[error("{0} qubits exceeds the dense limit")]
    TooLarge(usize),
    #[error("product is not Hermitian (imaginary part {0:.3e})")]
    NotHermitian(f64),
    #[error("clock register of {bits} bits cannot hold {steps} time steps")]
    ClockTooSmall { bits: usize, steps: usize },
    #[error("gate acts on qubit {qubit} but the circuit has {n} system qubits")]
    BadQubit { qubit: usize, n: usize },
    #[error("CNOT control and target coincide ({0})")]
    DegenerateCnot(usize),
    #[error("alpha = {0} outside [0, pi/2]")]
    AlphaOutOfRange(f64),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One weighted Pauli string. JSON form: `{"coeff": 1.5, "pauli": "ZX"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub pauli: PauliString,
}

/// Real-weighted sum of {I, X, Z} strings, kept merged and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    num_qubits: usize,
    terms: Vec<Term>,
}

impl PauliHamiltonian {
    pub fn zero(num_qubits: usize) -> Self {
        Self { num_qubits, terms: Vec::new() }
    }

    /// `c * I`.
    pub fn constant(num_qubits: usize, c: f64) -> Self {
        Self::from_terms(num_qubits, [(c, PauliString::identity(num_qubits))]).expect("identity term is valid")
    }

    /// `c` times the product of the listed single-qubit factors.
    pub fn monomial(num_qubits: usize, c: f64, factors: &[(usize, Pauli)]) -> Result<Self, HamiltonianError> {
        let mut v = vec![Pauli::I; num_qubits];
        for &(q, p) in factors {
            if q >= num_qubits {
                return Err(HamiltonianError::BadQubit { qubit: q, n: num_qubits });
            }
            v[q] = p;
        }
        Self::from_terms(num_qubits, [(c, PauliString::new(v))])
    }

    /// Merges duplicate strings, sorts canonically and drops negligible terms.
    pub fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self, HamiltonianError>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut map: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (c, p) in terms {
            if !c.is_finite() {
                return Err(HamiltonianError::NonFinite(c));
            }
            if p.len() != num_qubits {
                return Err(HamiltonianError::Length { expected: num_qubits, got: p.len(), pauli: p });
            }
            if p.count_y() > 0 {
                return Err(HamiltonianError::YFactor(p));
            }
            *map.entry(p).or_insert(0.0) += c;
        }
        Ok(Self::from_map(num_qubits, map))
    }

    fn from_map(num_qubits: usize, map: BTreeMap<PauliString, f64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.abs() >= DROP_TOL)
            .map(|(pauli, coeff)| Term { coeff, pauli })
            .collect();
        Self { num_qubits, terms }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Terms in canonical order (lexicographic over I < X < Y < Z).
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `pauli` (0 if absent). Panics on an unparsable string.
    pub fn coeff(&self, pauli: &str) -> f64 {
        let p: PauliString = pauli.parse().expect("valid Pauli string");
        self.terms.iter().find(|t| t.pauli == p).map_or(0.0, |t| t.coeff)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.num_qubits, other.num_qubits, "register size mismatch");
        let mut map: BTreeMap<PauliString, f64> = BTreeMap::new();
        for t in self.terms.iter().chain(&other.terms) {
            *map.entry(t.pauli.clone()).or_insert(0.0) += t.coeff;
        }
        Self::from_map(self.num_qubits, map)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let map = self.terms.iter().map(|t| (t.pauli.clone(), t.coeff * factor)).collect();
        Self::from_map(self.num_qubits, map)
    }

    /// Operator product. Fails if the result is not an XZ-type Hermitian sum.
    pub fn mul(&self, other: &Self) -> Result<Self, HamiltonianError> {
        assert_eq!(self.num_qubits, other.num_qubits, "register size mismatch");
        let mut map: BTreeMap<PauliString, C64> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let (phase, p) = a.pauli.mul(&b.pauli);
                let ph = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)]
                    [phase as usize];
                *map.entry(p).or_insert(C64::new(0.0, 0.0)) += ph * a.coeff * b.coeff;
            }
        }
        let mut real = BTreeMap::new();
        for (p, c) in map {
            if c.norm() < DROP_TOL {
                continue;
            }
            if c.im.abs() > 1e-12 {
                return Err(HamiltonianError::NotHermitian(c.im));
            }
            if p.count_y() > 0 {
                return Err(HamiltonianError::YFactor(p));
            }
            real.insert(p, c.re);
        }
        Ok(Self::from_map(self.num_qubits, real))
    }

    /// Embeds into a larger register; qubit `q` goes to `positions[q]`.
    pub fn embed(&self, num_qubits: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.num_qubits, "one position per qubit");
        let map = self
            .terms
            .iter()
            .map(|t| {
                let mut v = vec![Pauli::I; num_qubits];
                for (q, &pos) in positions.iter().enumerate() {
                    v[pos] = t.pauli.get(q);
                }
                (PauliString::new(v), t.coeff)
            })
            .collect();
        Self::from_map(num_qubits, map)
    }

    /// Tensor product `self (x) other` (self on the leading qubits).
    pub fn tensor(&self, other: &Self) -> Self {
        let n = self.num_qubits + other.num_qubits;
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let v: Vec<Pauli> = a.pauli.factors().iter().chain(b.pauli.factors()).copied().collect();
                *map.entry(PauliString::new(v)).or_insert(0.0) += a.coeff * b.coeff;
            }
        }
        Self::from_map(n, map)
    }

    /// `c = sum_l |c_l|` over the merged list, identity term included.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Dense real matrix, built from the basis-index masks of each term.
    pub fn matrix(&self) -> Result<DMatrix<f64>, HamiltonianError> {
        if self.num_qubits > MAX_QUBITS {
            return Err(HamiltonianError::TooLarge(self.num_qubits));
        }
        let d = 1usize << self.num_qubits;
        let mut m = DMatrix::<f64>::zeros(d, d);
        for t in &self.terms {
            let (x, z) = t.pauli.masks();
            for j in 0..d {
                let sign = if (j & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[(j ^ x, j)] += t.coeff * sign;
            }
        }
        Ok(m)
    }

    /// Sorted eigenvalues.
    pub fn spectrum(&self) -> Result<Vec<f64>, HamiltonianError> {
        let eig = SymmetricEigen::new(self.matrix()?);
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// Smallest eigenvalue `lambda(H)`.
    pub fn ground_energy(&self) -> Result<f64, HamiltonianError> {
        Ok(self.spectrum()?[0])
    }

    /// Exact `Tr(rho H)`.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64, HamiltonianError> {
        let mut e = 0.0;
        for t in &self.terms {
            e += t.coeff * state.expectation(&t.pauli)?;
        }
        Ok(e)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.terms).expect("terms serialize")
    }

    pub fn from_json(num_qubits: usize, s: &str) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let terms: Vec<Term> = serde_json::from_str(s)?;
        Ok(Self::from_terms(num_qubits, terms.into_iter().map(|t| (t.coeff, t.pauli)))?)
    }
}
