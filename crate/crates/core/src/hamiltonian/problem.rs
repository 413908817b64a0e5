use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use super::HamiltonianError;

/// Energies below this certify a "yes" instance.
pub const VERIFY_THRESHOLD: f64 = 0.4;
/// Energies above this certify a "no" instance.
pub const REFUTE_THRESHOLD: f64 = 0.5;

/// Which output probability the decision problem is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// "yes" iff `p_0 = cos^2(alpha) > b`.
    P0,
    /// "yes" iff `p_1 = sin^2(alpha) > b`.
    P1,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::P0 => "P0",
            Variant::P1 => "P1",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p0" => Ok(Variant::P0),
            "p1" => Ok(Variant::P1),
            other => Err(format!("unknown variant '{other}' (expected p0 or p1)")),
        }
    }
}

/// Promise problem on the one-gate circuit `U(alpha)` with gap `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    pub alpha: f64,
    pub variant: Variant,
    pub a: f64,
    pub b: f64,
}

impl DecisionProblem {
    pub const DEFAULT_A: f64 = 0.1;
    pub const DEFAULT_B: f64 = 0.6;

    pub fn new(alpha: f64, variant: Variant) -> Result<Self, HamiltonianError> {
        // Allow round-off around the endpoints, e.g. 1.5708 for pi/2.
        if !(-1e-9..=FRAC_PI_2 + 1e-4).contains(&alpha) || !alpha.is_finite() {
            return Err(HamiltonianError::AlphaOutOfRange(alpha));
        }
        Ok(Self { alpha, variant, a: Self::DEFAULT_A, b: Self::DEFAULT_B })
    }

    /// `p_0(C) = cos^2(alpha)`.
    pub fn p0(&self) -> f64 {
        self.alpha.cos().powi(2)
    }

    /// `p_1(C) = sin^2(alpha)`.
    pub fn p1(&self) -> f64 {
        self.alpha.sin().powi(2)
    }

    /// Probability the variant asks about.
    pub fn target_probability(&self) -> f64 {
        match self.variant {
            Variant::P0 => self.p0(),
            Variant::P1 => self.p1(),
        }
    }

    pub fn is_yes_instance(&self) -> bool {
        self.target_probability() > self.b
    }

    pub fn is_no_instance(&self) -> bool {
        self.target_probability() < self.a
    }

    /// Turns a "no" claim into the equivalent "yes" claim: conjugating the
    /// gate as `X U(alpha) Z = U(pi/2 - alpha)` swaps the output probabilities.
    pub fn reduce_no_claim(&self) -> Self {
        Self { alpha: (FRAC_PI_2 - self.alpha).max(0.0), ..*self }
    }

    /// `f(H)` and `g(H)`: the "yes" and "no" energy thresholds.
    pub fn thresholds(&self) -> (f64, f64) {
        (VERIFY_THRESHOLD, REFUTE_THRESHOLD)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn no_claim_reduction() {
        let p = DecisionProblem::new(0.0, Variant::P0).unwrap();
        assert!((p.reduce_no_claim().alpha - FRAC_PI_2).abs() < 1e-15);
        let q = DecisionProblem::new(FRAC_PI_4, Variant::P0).unwrap();
        assert!((q.reduce_no_claim().alpha - FRAC_PI_4).abs() < 1e-15);
        let r = DecisionProblem::new(0.1 * FRAC_PI_2, Variant::P1).unwrap();
        let rr = r.reduce_no_claim();
        assert!((rr.alpha - 0.9 * FRAC_PI_2).abs() < 1e-15);
        assert_eq!(rr.variant, Variant::P1);
    }

    #[test]
    fn instance_classification() {
        assert!(DecisionProblem::new(0.0, Variant::P0).unwrap().is_yes_instance());
        assert!(DecisionProblem::new(FRAC_PI_2, Variant::P0).unwrap().is_no_instance());
        assert!(DecisionProblem::new(FRAC_PI_2, Variant::P1).unwrap().is_yes_instance());
        assert!(DecisionProblem::new(2.0, Variant::P0).is_err());
    }
}
