//! Energy-curve CSV files.
//!
//! The first line is `# schema=1`, followed by a header row
//! `alpha,e_est,e_err,lambda,variant,shots,seed,mode`.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::str::FromStr;
use thiserror::Error;

use crate::hamiltonian::Variant;

pub const SCHEMA_LINE: &str = "# schema=1";
pub const COLUMNS: [&str; 8] = ["alpha", "e_est", "e_err", "lambda", "variant", "shots", "seed", "mode"];

#[derive(Debug, Error)]
pub enum CurveError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing or unsupported schema line")]
    Schema,
}

/// How a curve point was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    /// Shot-sampled rounds through the full protocol.
    Delegated,
    /// Shot-sampled measurements of the bare two-qubit state.
    Direct,
    /// Delegated pipeline with exact density-operator probabilities.
    Exact,
    /// Direct pipeline with exact probabilities.
    DirectExact,
}

impl CurveMode {
    pub fn is_sampled(self) -> bool {
        matches!(self, CurveMode::Delegated | CurveMode::Direct)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CurveMode::Delegated => "delegated",
            CurveMode::Direct => "direct",
            CurveMode::Exact => "exact",
            CurveMode::DirectExact => "direct-exact",
        }
    }
}

impl FromStr for CurveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delegated" => Ok(CurveMode::Delegated),
            "direct" => Ok(CurveMode::Direct),
            "exact" => Ok(CurveMode::Exact),
            "direct-exact" => Ok(CurveMode::DirectExact),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub e_est: f64,
    pub e_err: f64,
    pub lambda: f64,
    #[serde(with = "variant_lower")]
    pub variant: Variant,
    pub shots: u64,
    pub seed: u64,
    pub mode: CurveMode,
}

mod variant_lower {
    use super::Variant;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Variant, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string().to_lowercase())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Variant, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn write_csv<W: Write>(mut out: W, points: &[CurvePoint]) -> Result<(), CurveError> {
    writeln!(out, "{SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    if points.is_empty() {
        w.write_record(COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CurvePoint>, CurveError> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let mut lines = text.splitn(2, '\n');
    if lines.next().map(str::trim_end) != Some(SCHEMA_LINE) {
        return Err(CurveError::Schema);
    }
    let body = lines.next().unwrap_or("");
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    r.deserialize().map(|row| row.map_err(CurveError::from)).collect()
}
