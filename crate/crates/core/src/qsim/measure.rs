use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::Representation;
use super::{check_targets, Gate, QuantumState, SimError};

/// Measurement basis. X outcome 0 is the +1 eigenstate `|+>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// Clamps tiny negative round-off in a probability.
fn clamp_probability(p: f64) -> Result<f64, SimError> {
    if p < -1e-12 {
        Err(SimError::NegativeProbability(p))
    } else {
        Ok(p.max(0.0))
    }
}

fn outcome_of(index: usize, n: usize, targets: &[usize]) -> usize {
    targets.iter().fold(0, |acc, &q| (acc << 1) | (index >> (n - 1 - q) & 1))
}

/// Bits of `value` as a vector of length `k`, most significant first.
pub(crate) fn to_bits(value: usize, k: usize) -> Vec<u8> {
    (0..k).map(|i| (value >> (k - 1 - i) & 1) as u8).collect()
}

impl QuantumState {
    fn rotate_to_z(&mut self, targets: &[usize], basis: Basis) -> Result<(), SimError> {
        if basis == Basis::X {
            for &q in targets {
                self.apply_gate(&Gate::H { qubit: q })?;
            }
        }
        Ok(())
    }

    /// Exact outcome distribution of measuring `targets` in `basis`. Index
    /// `o` of the result encodes the bits with the first target as the high bit.
    pub fn outcome_distribution(&self, targets: &[usize], basis: Basis) -> Result<Vec<f64>, SimError> {
        check_targets(targets, self.num_qubits())?;
        let mut s = self.clone();
        s.rotate_to_z(targets, basis)?;
        let n = s.num_qubits();
        let mut out = vec![0.0; 1 << targets.len()];
        for (i, p) in s.probabilities().into_iter().enumerate() {
            out[outcome_of(i, n, targets)] += p;
        }
        out.into_iter().map(clamp_probability).collect()
    }

    /// Projects onto a given outcome. Returns the branch probability and the
    /// renormalized post-measurement state.
    pub fn project(&self, targets: &[usize], basis: Basis, outcome: &[u8]) -> Result<(f64, QuantumState), SimError> {
        check_targets(targets, self.num_qubits())?;
        assert_eq!(outcome.len(), targets.len(), "one outcome bit per target");
        let want = outcome.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let mut s = self.clone();
        s.rotate_to_z(targets, basis)?;
        let n = s.num_qubits();
        let d = s.dim();
        let keep = |i: usize| outcome_of(i, n, targets) == want;
        let zero = C64::new(0.0, 0.0);
        let repr = match s.representation().clone() {
            Representation::Pure(mut a) => {
                for (i, x) in a.iter_mut().enumerate() {
                    if !keep(i) {
                        *x = zero;
                    }
                }
                Representation::Pure(a)
            }
            Representation::Mixed(mut rho) => {
                for i in 0..d {
                    for j in 0..d {
                        if !keep(i) || !keep(j) {
                            rho[i * d + j] = zero;
                        }
                    }
                }
                Representation::Mixed(rho)
            }
        };
        s.set_repr(repr);
        let p = clamp_probability(s.trace())?;
        if p <= 0.0 {
            return Err(SimError::ZeroProbability);
        }
        s.scale(1.0 / p);
        if basis == Basis::X {
            for &q in targets {
                s.apply_gate(&Gate::H { qubit: q })?;
            }
        }
        Ok((p, s))
    }

    /// Projective measurement of `targets` with Born sampling and collapse.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        targets: &[usize],
        basis: Basis,
        rng: &mut R,
    ) -> Result<(Vec<u8>, QuantumState), SimError> {
        let dist = self.outcome_distribution(targets, basis)?;
        let o = sample_index(&dist, rng);
        let bits = to_bits(o, targets.len());
        let (_, post) = self.project(targets, basis, &bits)?;
        Ok((bits, post))
    }
}

/// Draws an index from a (possibly slightly unnormalized) distribution.
pub fn sample_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let total: f64 = dist.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut cum = 0.0;
    let mut last = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            last = i;
        }
        cum += p;
        if u < cum {
            return i;
        }
    }
    last
}
