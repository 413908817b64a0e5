//! Toy trapdoor functions on 2-bit strings.
//!
//! `y_0(b, w) = (b, w)` is one-to-one and `y_1(b, w) = (b XOR w, 0)` is
//! two-to-one with range `{00, 10}`. At this size the "trapdoor" is simply the
//! lookup table; what the module enforces is who may use it. Prover-side code
//! only sees a [`PublicKey`] and calls [`eval`]; inversion and decoding hang
//! off [`TrapdoorKeyPair`], which refuses to serialize.

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::pauli::Pauli;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrapdoorError {
    #[error("function label must be 0 or 1, got {0}")]
    BadLabel(u8),
    #[error("bit value must be 0 or 1, got {0}")]
    BadBit(u8),
    #[error("Y factors have no function label")]
    UnsupportedPauli,
    #[error("commitment {0:?} has no preimage")]
    NoPreimage([u8; 2]),
}

/// Function label `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionLabel {
    /// `k = 0`, the identity; used to delegate a Z measurement.
    OneToOne,
    /// `k = 1`, two-to-one; used to delegate an X measurement.
    TwoToOne,
}

impl FunctionLabel {
    pub fn from_bit(k: u8) -> Result<Self, TrapdoorError> {
        match k {
            0 => Ok(FunctionLabel::OneToOne),
            1 => Ok(FunctionLabel::TwoToOne),
            other => Err(TrapdoorError::BadLabel(other)),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            FunctionLabel::OneToOne => 0,
            FunctionLabel::TwoToOne => 1,
        }
    }
}

/// Committed 2-bit string `y_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    pub y_bar: [u8; 2],
}

impl Commitment {
    pub fn new(y_bar: [u8; 2]) -> Result<Self, TrapdoorError> {
        for b in y_bar {
            check_bit(b)?;
        }
        Ok(Self { y_bar })
    }

    /// Whether the string lies in the range of `y_k`.
    pub fn in_range(&self, label: FunctionLabel) -> bool {
        match label {
            FunctionLabel::OneToOne => true,
            FunctionLabel::TwoToOne => self.y_bar[1] == 0,
        }
    }
}

fn check_bit(b: u8) -> Result<(), TrapdoorError> {
    if b > 1 {
        Err(TrapdoorError::BadBit(b))
    } else {
        Ok(())
    }
}

/// `y_k(b, w)`. Bits are taken modulo 2.
pub fn eval(label: FunctionLabel, b: u8, w: u8) -> [u8; 2] {
    let (b, w) = (b & 1, w & 1);
    match label {
        FunctionLabel::OneToOne => [b, w],
        FunctionLabel::TwoToOne => [b ^ w, 0],
    }
}

/// `k = 0` for Z or I, `k = 1` for X.
pub fn label_for_pauli(p: Pauli) -> Result<FunctionLabel, TrapdoorError> {
    match p {
        Pauli::I | Pauli::Z => Ok(FunctionLabel::OneToOne),
        Pauli::X => Ok(FunctionLabel::TwoToOne),
        Pauli::Y => Err(TrapdoorError::UnsupportedPauli),
    }
}

/// What the prover is told: `{"k": 0|1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicKey {
    pub k: u8,
}

impl PublicKey {
    pub fn label(&self) -> Result<FunctionLabel, TrapdoorError> {
        FunctionLabel::from_bit(self.k)
    }
}

/// Label plus the inversion table. Verifier-only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapdoorKeyPair {
    label: FunctionLabel,
    /// `preimages[y]` lists `(b, x)` with `y_k(b, x) = y`, `y` read as `2 y_0 + y_1`.
    preimages: [Vec<(u8, u8)>; 4],
}

impl TrapdoorKeyPair {
    pub fn generate(label: FunctionLabel) -> Self {
        let mut preimages: [Vec<(u8, u8)>; 4] = Default::default();
        for b in 0..2u8 {
            for x in 0..2u8 {
                let y = eval(label, b, x);
                preimages[(y[0] * 2 + y[1]) as usize].push((b, x));
            }
        }
        Self { label, preimages }
    }

    pub fn label(&self) -> FunctionLabel {
        self.label
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey { k: self.label.bit() }
    }

    /// Preimages of `y_bar`, ordered by `b`. Empty if `y_bar` is outside the range.
    pub fn invert(&self, y_bar: [u8; 2]) -> Vec<(u8, u8)> {
        let idx = ((y_bar[0] & 1) * 2 + (y_bar[1] & 1)) as usize;
        self.preimages[idx].clone()
    }

    /// Effective outcome `m` of the delegated measurement.
    ///
    /// For `k = 0` this is `b` of the unique preimage and `(c, d)` are unused.
    /// For `k = 1`, `m = c XOR d (x_0 XOR x_1)` with `(0, x_0)`, `(1, x_1)`
    /// the two preimages.
    pub fn decode(&self, y_bar: &Commitment, c: u8, d: u8) -> Result<u8, TrapdoorError> {
        check_bit(c)?;
        check_bit(d)?;
        let pre = self.invert(y_bar.y_bar);
        match (self.label, pre.as_slice()) {
            (FunctionLabel::OneToOne, [(b, _)]) => Ok(*b),
            (FunctionLabel::TwoToOne, [(0, x0), (1, x1)]) => Ok(c ^ (d & (x0 ^ x1))),
            _ => Err(TrapdoorError::NoPreimage(y_bar.y_bar)),
        }
    }
}

impl Serialize for TrapdoorKeyPair {
    fn serialize<S: Serializer>(&self, _serializer: S) -> Result<S::Ok, S::Error> {
        Err(serde::ser::Error::custom("trapdoor key pairs are verifier-private and never serialized"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        assert_eq!(eval(FunctionLabel::OneToOne, 1, 0), [1, 0]);
        assert_eq!(eval(FunctionLabel::TwoToOne, 0, 1), [1, 0]);
        assert_eq!(eval(FunctionLabel::TwoToOne, 1, 1), [0, 0]);
    }

    #[test]
    fn inversion() {
        let k0 = TrapdoorKeyPair::generate(FunctionLabel::OneToOne);
        let k1 = TrapdoorKeyPair::generate(FunctionLabel::TwoToOne);
        assert_eq!(k0.invert([1, 0]), vec![(1, 0)]);
        assert_eq!(k1.invert([0, 0]), vec![(0, 0), (1, 1)]);
        assert!(k1.invert([0, 1]).is_empty());
    }

    #[test]
    fn decoding() {
        let k0 = TrapdoorKeyPair::generate(FunctionLabel::OneToOne);
        let k1 = TrapdoorKeyPair::generate(FunctionLabel::TwoToOne);
        for c in 0..2 {
            for d in 0..2 {
                assert_eq!(k0.decode(&Commitment::new([1, 0]).unwrap(), c, d).unwrap(), 1);
            }
        }
        assert_eq!(k1.decode(&Commitment::new([0, 0]).unwrap(), 1, 1).unwrap(), 0);
        assert_eq!(k1.decode(&Commitment::new([1, 0]).unwrap(), 0, 0).unwrap(), 0);
        assert!(k1.decode(&Commitment::new([1, 1]).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn labels_from_paulis() {
        assert_eq!(label_for_pauli(Pauli::Z).unwrap(), FunctionLabel::OneToOne);
        assert_eq!(label_for_pauli(Pauli::I).unwrap(), FunctionLabel::OneToOne);
        assert_eq!(label_for_pauli(Pauli::X).unwrap(), FunctionLabel::TwoToOne);
        assert!(label_for_pauli(Pauli::Y).is_err());
    }

    #[test]
    fn key_pair_never_serializes() {
        let k = TrapdoorKeyPair::generate(FunctionLabel::TwoToOne);
        assert!(serde_json::to_string(&k).is_err());
        assert_eq!(serde_json::to_string(&k.public_key()).unwrap(), r#"{"k":1}"#);
    }
}
