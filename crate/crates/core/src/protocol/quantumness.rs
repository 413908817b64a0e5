//! Single-round test of quantumness built on a two-to-one function.
//!
//! The verifier holds a two-to-one `F` on `m` bits. The prover commits to an
//! image `y`, then is asked either for a preimage (branch A) or for an
//! X-basis string `d` on the input register (branch B), which passes iff
//! `y` is in range and `d . (x0 XOR x1) = 0 (mod 2)`. At this scale a classical
//! prover that memorizes one preimage and always answers `d = 0` passes both
//! branches, so the demo does not separate classical from quantum provers.

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use super::ProtocolError;
use crate::qsim::{Basis, Gate, QuantumState, MAX_QUBITS};
use crate::rng::SimRng;

/// Largest input width accepted by the sampled demo.
pub const MAX_INPUT_BITS: usize = 8;

/// A two-to-one function on `m`-bit inputs with outputs in `0..2^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoToOneFunction {
    m: usize,
    table: Vec<u32>,
}

impl TwoToOneFunction {
    /// Checks that every image has exactly two preimages.
    pub fn new(m: usize, table: Vec<u32>) -> Result<Self, ProtocolError> {
        if m == 0 || m > MAX_INPUT_BITS {
            return Err(ProtocolError::Config(format!("input width {m} outside 1..={MAX_INPUT_BITS}")));
        }
        if table.len() != 1 << m {
            return Err(ProtocolError::Config(format!("table has {} entries, expected {}", table.len(), 1 << m)));
        }
        let mut counts = vec![0u32; 1 << m];
        for &y in &table {
            let slot = counts
                .get_mut(y as usize)
                .ok_or_else(|| ProtocolError::Config(format!("image {y} does not fit in {m} bits")))?;
            *slot += 1;
        }
        if let Some(y) = counts.iter().position(|&c| c != 0 && c != 2) {
            return Err(ProtocolError::Config(format!(
                "function is not two-to-one: image {y} has {} preimages",
                counts[y]
            )));
        }
        Ok(Self { m, table })
    }

    /// `F(x) = label(min(x, x XOR s))` for a random nonzero shift `s` and a
    /// random injective labelling of the pairs.
    pub fn random(m: usize, rng: &mut SimRng) -> Result<Self, ProtocolError> {
        if m == 0 || m > MAX_INPUT_BITS {
            return Err(ProtocolError::Config(format!("input width {m} outside 1..={MAX_INPUT_BITS}")));
        }
        let n = 1usize << m;
        let s = rng.random_range(1..n);
        let mut labels: Vec<u32> = (0..n as u32).collect();
        labels.shuffle(rng);
        let mut table = vec![0u32; n];
        let mut next = 0;
        for x in 0..n {
            let partner = x ^ s;
            if x < partner {
                table[x] = labels[next];
                table[partner] = labels[next];
                next += 1;
            }
        }
        Self::new(m, table)
    }

    pub fn input_bits(&self) -> usize {
        self.m
    }

    pub fn eval(&self, x: usize) -> usize {
        self.table[x] as usize
    }

    /// The claw `(x0, x1)` with `x0 < x1` mapping to `y`, if `y` is in range.
    pub fn preimages(&self, y: usize) -> Option<(usize, usize)> {
        let mut it = self.table.iter().enumerate().filter(|(_, &v)| v as usize == y).map(|(x, _)| x);
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    }

    /// Branch A predicate.
    pub fn accept_preimage(&self, y: usize, x: usize) -> bool {
        x < self.table.len() && self.eval(x) == y
    }

    /// Branch B predicate.
    pub fn accept_equation(&self, y: usize, d: usize) -> bool {
        match self.preimages(y) {
            Some((x0, x1)) => ((d & (x0 ^ x1)).count_ones() & 1) == 0,
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum QuantumnessProver {
    /// Prepares `sum_x |x>|F(x)>` with depolarizing rate `lambda` on every qubit.
    Honest { lambda: f64 },
    /// Memorizes one preimage and answers `d = 0`.
    ClassicalBaseline,
}

impl FromStr for QuantumnessProver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "honest" => Ok(QuantumnessProver::Honest { lambda: 0.0 }),
            "classical-baseline" | "classical" => Ok(QuantumnessProver::ClassicalBaseline),
            other => Err(format!("unknown quantumness prover '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumnessResult {
    pub m_bits: usize,
    pub trials: usize,
    pub prover: QuantumnessProver,
    pub trials_a: usize,
    pub trials_b: usize,
    pub p_a: f64,
    pub p_a_err: f64,
    pub p_b: f64,
    pub p_b_err: f64,
    /// `p_A + 2 p_B`; at most 2 for the best classical strategy against a
    /// secure function family.
    pub score: f64,
}

fn flip_bits(value: usize, bits: usize, p: f64, rng: &mut SimRng) -> usize {
    let mut v = value;
    if p > 0.0 {
        for q in 0..bits {
            if rng.random_bool(p) {
                v ^= 1 << q;
            }
        }
    }
    v
}

fn binomial(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Runs `trials` interactions; each picks branch A or B with a fair coin.
///
/// The honest prover is sampled exactly: depolarizing noise flips each
/// measured bit with probability `lambda / 2` in whichever basis it is read.
pub fn quantumness_demo(
    f: &TwoToOneFunction,
    trials: usize,
    prover: QuantumnessProver,
    rng: &mut SimRng,
) -> Result<QuantumnessResult, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::Config("trials must be at least 1".into()));
    }
    let m = f.input_bits();
    let n = 1usize << m;
    let images: Vec<usize> = (0..n).filter(|&y| f.preimages(y).is_some()).collect();
    let (mut trials_a, mut trials_b, mut pass_a, mut pass_b) = (0, 0, 0, 0);
    for _ in 0..trials {
        let branch_a = rng.random_bool(0.5);
        match prover {
            QuantumnessProver::ClassicalBaseline => {
                let x0 = rng.random_range(0..n);
                let y = f.eval(x0);
                if branch_a {
                    trials_a += 1;
                    pass_a += usize::from(f.accept_preimage(y, x0));
                } else {
                    trials_b += 1;
                    pass_b += usize::from(f.accept_equation(y, 0));
                }
            }
            QuantumnessProver::Honest { lambda } => {
                let flip = lambda / 2.0;
                let y_true = images[rng.random_range(0..images.len())];
                let y = flip_bits(y_true, m, flip, rng);
                let (x0, x1) = f.preimages(y_true).expect("image in range");
                if branch_a {
                    trials_a += 1;
                    let x = if rng.random_bool(0.5) { x0 } else { x1 };
                    let x = flip_bits(x, m, flip, rng);
                    pass_a += usize::from(f.accept_preimage(y, x));
                } else {
                    trials_b += 1;
                    // X outcome of (|x0> + |x1>)/sqrt2: uniform over d with d.(x0^x1) = 0.
                    let valid: Vec<usize> =
                        (0..n).filter(|d| (d & (x0 ^ x1)).count_ones() % 2 == 0).collect();
                    let d = flip_bits(valid[rng.random_range(0..valid.len())], m, flip, rng);
                    pass_b += usize::from(f.accept_equation(y, d));
                }
            }
        }
    }
    let (p_a, p_a_err) = binomial(pass_a, trials_a);
    let (p_b, p_b_err) = binomial(pass_b, trials_b);
    Ok(QuantumnessResult {
        m_bits: m,
        trials,
        prover,
        trials_a,
        trials_b,
        p_a,
        p_a_err,
        p_b,
        p_b_err,
        score: p_a + 2.0 * p_b,
    })
}

/// Exact `(p_A, p_B)` of the honest prover from a full density-operator
/// simulation of the `2m`-qubit register. Inputs occupy the first `m` qubits.
pub fn quantumness_exact_density(f: &TwoToOneFunction, lambda: f64) -> Result<(f64, f64), ProtocolError> {
    let m = f.input_bits();
    if 2 * m > MAX_QUBITS {
        return Err(ProtocolError::Config(format!("{} qubits exceed the simulator limit", 2 * m)));
    }
    let n = 1usize << m;
    let mut amps = vec![C64::new(0.0, 0.0); n * n];
    let a = 1.0 / (n as f64).sqrt();
    for x in 0..n {
        amps[(x << m) | f.eval(x)] = C64::new(a, 0.0);
    }
    let mut state = QuantumState::from_amplitudes(amps)?;
    if lambda > 0.0 {
        state.depolarize_all(lambda)?;
    }
    let all: Vec<usize> = (0..2 * m).collect();
    let z = state.outcome_distribution(&all, Basis::Z)?;
    let mut rotated = state;
    for q in 0..m {
        rotated.apply_gate(&Gate::H { qubit: q })?;
    }
    let x = rotated.outcome_distribution(&all, Basis::Z)?;
    let mask = n - 1;
    let mut p_a = 0.0;
    let mut p_b = 0.0;
    for i in 0..n * n {
        let (hi, y) = (i >> m, i & mask);
        if f.accept_preimage(y, hi) {
            p_a += z[i];
        }
        if f.accept_equation(y, hi) {
            p_b += x[i];
        }
    }
    Ok((p_a, p_b))
}
