//! Newline-delimited JSON messages exchanged between verifier and prover.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use super::ProtocolError;
use crate::hamiltonian::Variant;

/// A bit on the wire; deserialization rejects anything but 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bit(u8);

impl Bit {
    pub fn new(b: u8) -> Self {
        Self(b & 1)
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl Serialize for Bit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u8::deserialize(d)? {
            b @ (0 | 1) => Ok(Bit(b)),
            other => Err(serde::de::Error::custom(format!("bit must be 0 or 1, got {other}"))),
        }
    }
}

pub fn bits2(b: [u8; 2]) -> [Bit; 2] {
    [Bit::new(b[0]), Bit::new(b[1])]
}

pub fn raw2(b: [Bit; 2]) -> [u8; 2] {
    [b[0].get(), b[1].get()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Claim {
    Yes,
    No,
}

impl FromStr for Claim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yes" => Ok(Claim::Yes),
            "no" => Ok(Claim::No),
            other => Err(format!("claim must be yes or no, got '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    Test,
    Measure,
}

impl FromStr for RoundKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "test" => Ok(RoundKind::Test),
            "measure" => Ok(RoundKind::Measure),
            other => Err(format!("round must be test or measure, got '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Accept,
    Reject,
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TestMismatch,
    InvalidCommitment,
    ProtocolError,
    EnergyTooHigh,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TestMismatch => "test_mismatch",
            RejectReason::InvalidCommitment => "invalid_commitment",
            RejectReason::ProtocolError => "protocol_error",
            RejectReason::EnergyTooHigh => "energy_too_high",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum Message {
    #[serde(rename = "CIRCUIT")]
    Circuit { alpha: f64, variant: Variant },
    #[serde(rename = "ANSWER")]
    Answer { claim: Claim },
    #[serde(rename = "KEYS")]
    Keys { k1: Bit, k2: Bit },
    #[serde(rename = "COMMIT")]
    Commit { y1: [Bit; 2], y2: [Bit; 2] },
    #[serde(rename = "ROUND")]
    Round { round: RoundKind },
    #[serde(rename = "OUTCOMES")]
    Outcomes { q13: [Bit; 2], q26: [Bit; 2] },
    #[serde(rename = "VERDICT")]
    Verdict { verdict: VerdictKind, reason: Option<String> },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Circuit { .. } => "CIRCUIT",
            Message::Answer { .. } => "ANSWER",
            Message::Keys { .. } => "KEYS",
            Message::Commit { .. } => "COMMIT",
            Message::Round { .. } => "ROUND",
            Message::Outcomes { .. } => "OUTCOMES",
            Message::Verdict { .. } => "VERDICT",
        }
    }

    /// Compact single-line JSON (no trailing newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }

    pub fn from_line(line: &str) -> Result<Self, ProtocolError> {
        serde_json::from_str(line.trim_end()).map_err(|e| ProtocolError::Malformed(format!("{e}: {}", line.trim_end())))
    }
}
