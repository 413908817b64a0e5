//! Exact round statistics from the density-operator pipeline.

use serde::{Deserialize, Serialize};

use super::estimate::{estimate_from_tallies, BasisTally, EnergyEstimate};
use super::messages::RoundKind;
use super::prover::{commitment_bits, reply_bits, PreparedDistributions};
use super::verifier::{check_outcomes, commitment_valid, keypairs_for};
use super::ProtocolError;
use crate::hamiltonian::DecisionProblem;

/// Exact per-round probabilities for one key pair against an honest prover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRoundStats {
    pub keys: [u8; 2],
    /// Probability the commitment falls outside the range of a two-to-one label.
    pub invalid_commitment: f64,
    /// Rejection probability of a test round (invalid commitment included).
    pub test_reject: f64,
    /// Rejection probability of a measurement round.
    pub measure_reject: f64,
    /// Joint probability of each accepted decoded `(m1, m2)`; sums to
    /// `1 - measure_reject`.
    pub decoded: [[f64; 2]; 2],
}

impl ExactRoundStats {
    /// Decoded distribution conditioned on acceptance.
    pub fn conditional(&self) -> [[f64; 2]; 2] {
        let total: f64 = self.decoded.iter().flatten().sum();
        let mut out = self.decoded;
        if total > 0.0 {
            out.iter_mut().flatten().for_each(|p| *p /= total);
        }
        out
    }
}

/// Round statistics of an honest prover holding `|phi_{k1,k2}>` for `alpha`
/// under depolarizing rate `lambda`.
pub fn exact_round_stats(alpha: f64, keys: [u8; 2], lambda: f64) -> Result<ExactRoundStats, ProtocolError> {
    let dists = PreparedDistributions::new(alpha, keys, lambda)?;
    Ok(stats_from_distributions(&dists, keys))
}

pub(crate) fn stats_from_distributions(dists: &PreparedDistributions, keys: [u8; 2]) -> ExactRoundStats {
    let keypairs = keypairs_for(keys);
    let mut invalid = 0.0;
    let mut test_reject = 0.0;
    for (i, &p) in dists.round(RoundKind::Test).iter().enumerate() {
        let commit = commitment_bits(i);
        if !commitment_valid(keys, commit) {
            invalid += p;
            test_reject += p;
        } else if check_outcomes(keys, commit, RoundKind::Test, reply_bits(i), &keypairs).is_err() {
            test_reject += p;
        }
    }
    let mut measure_reject = 0.0;
    let mut decoded = [[0.0; 2]; 2];
    for (i, &p) in dists.round(RoundKind::Measure).iter().enumerate() {
        let commit = commitment_bits(i);
        if !commitment_valid(keys, commit) {
            measure_reject += p;
            continue;
        }
        match check_outcomes(keys, commit, RoundKind::Measure, reply_bits(i), &keypairs) {
            Ok(Some([m1, m2])) => decoded[m1 as usize][m2 as usize] += p,
            _ => measure_reject += p,
        }
    }
    ExactRoundStats { keys, invalid_commitment: invalid, test_reject, measure_reject, decoded }
}

/// Exact tallies for the four basis settings, as probabilities.
pub fn exact_tallies(problem: &DecisionProblem, lambda: f64) -> Result<[BasisTally; 4], ProtocolError> {
    let mut out = [BasisTally::default(); 4];
    for (h, t) in out.iter_mut().enumerate() {
        let s = exact_round_stats(problem.alpha, [(h >> 1) as u8, (h & 1) as u8], lambda)?;
        *t = BasisTally { counts: s.decoded, rejected: s.measure_reject };
    }
    Ok(out)
}

/// Noise-model energy of the delegated estimator in the limit of infinitely
/// many shots. Expectations are conditioned on accepted measurement rounds.
pub fn exact_energy(problem: &DecisionProblem, lambda: f64) -> Result<EnergyEstimate, ProtocolError> {
    let tallies = exact_tallies(problem, lambda)?;
    Ok(estimate_from_tallies(*problem, tallies, 0, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Variant;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn ideal_energy_is_sin_squared() {
        for k in 0..=8 {
            let alpha = k as f64 / 8.0 * FRAC_PI_2;
            let p = DecisionProblem::new(alpha, Variant::P0).unwrap();
            let e = exact_energy(&p, 0.0).unwrap();
            assert!((e.energy - alpha.sin().powi(2)).abs() < 1e-10, "alpha {alpha}: {}", e.energy);
        }
    }

    #[test]
    fn noisy_reference_values() {
        // Independent numpy evaluation of the same pipeline.
        let p = DecisionProblem::new(0.0, Variant::P0).unwrap();
        assert!((exact_energy(&p, 0.05).unwrap().energy - 0.31394).abs() < 1e-4);
        let p = DecisionProblem::new(FRAC_PI_2, Variant::P1).unwrap();
        assert!((exact_energy(&p, 0.05).unwrap().energy - 0.47324).abs() < 1e-4);
        assert!((exact_energy(&p, 0.035).unwrap().energy - 0.33678).abs() < 1e-4);
    }

    #[test]
    fn measure_rejection_rates() {
        let expect = [0.0, 0.025, 0.025, 0.049375];
        for h in 0..4 {
            let s = exact_round_stats(0.3, [(h >> 1) as u8, (h & 1) as u8], 0.05).unwrap();
            assert!((s.measure_reject - expect[h]).abs() < 1e-12, "h={h}: {}", s.measure_reject);
        }
    }

    #[test]
    fn ideal_rounds_never_reject() {
        for h in 0..4 {
            let s = exact_round_stats(0.7, [(h >> 1) as u8, (h & 1) as u8], 0.0).unwrap();
            assert!(s.test_reject.abs() < 1e-12 && s.measure_reject.abs() < 1e-12);
        }
    }
}
