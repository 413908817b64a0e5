//! Pauli operators and tensor-product strings.
//!
//! A [`PauliString`] is written left to right in qubit order: the first
//! character acts on qubit 0. See [`crate::qsim`] for how qubit positions map
//! onto basis-state indices.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid Pauli character '{0}'")]
pub struct ParsePauliError(pub char);

impl Pauli {
    pub fn from_char(c: char) -> Result<Self, ParsePauliError> {
        match c {
            'I' | '1' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(ParsePauliError(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-qubit product `self * rhs = i^phase * result`.
    pub fn mul(self, rhs: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    /// Flips computational basis states (X or Y component).
    pub fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Has a Z component (Z or Y).
    pub fn phases(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Self {
        Self(factors)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// `P` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut v = vec![Pauli::I; n];
        v[q] = p;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.0
    }

    pub fn get(&self, q: usize) -> Pauli {
        self.0[q]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Support size.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Basis-index masks `(x_mask, z_mask)` under the big-endian convention.
    pub fn masks(&self) -> (usize, usize) {
        let n = self.0.len();
        let mut x = 0usize;
        let mut z = 0usize;
        for (q, p) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if p.flips() {
                x |= bit;
            }
            if p.phases() {
                z |= bit;
            }
        }
        (x, z)
    }

    pub fn count_y(&self) -> usize {
        self.0.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// Product `self * rhs = i^phase * result`.
    ///
    /// # Panics
    /// If the strings have different lengths.
    pub fn mul(&self, rhs: &PauliString) -> (u8, PauliString) {
        assert_eq!(self.len(), rhs.len(), "Pauli string length mismatch");
        let mut phase = 0u8;
        let factors = self
            .0
            .iter()
            .zip(&rhs.0)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase = (phase + ph) % 4;
                p
            })
            .collect();
        (phase, PauliString(factors))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = ParsePauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars().map(Pauli::from_char).collect::<Result<Vec<_>, _>>().map(PauliString)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
