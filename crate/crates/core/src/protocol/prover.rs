//! Prover side: the honest eight-qubit preparation and the cheating strategies.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;
use std::sync::Arc;

use super::layout::{AUX_W, AUX_Y, ETA, NUM_QUBITS};
use super::messages::{bits2, Claim, Message, RoundKind};
use super::ProtocolError;
use crate::hamiltonian::DecisionProblem;
use crate::qsim::{Gate, QuantumState, SimError};
use crate::rng::{streams, substream, SimRng};
use crate::trapdoor::{eval, FunctionLabel};

/// `H` on the clock qubit then `CU(alpha)` onto the system qubit: prepares
/// `|eta(alpha)>` on qubits 0 and 1 from `|00>`.
pub fn eta_circuit(alpha: f64) -> Vec<Gate> {
    vec![Gate::H { qubit: ETA[1] }, Gate::Cu { control: ETA[1], target: ETA[0], alpha }]
}

/// Per eta-qubit: `H` on the `w` auxiliary, then write `y_k(b, w)` into the two
/// output auxiliaries. `k = 0` copies `(b, w)`; `k = 1` writes `(b XOR w, 0)`.
pub fn entangling_block(keys: [u8; 2]) -> Vec<Gate> {
    let mut gates = Vec::new();
    for i in 0..2 {
        let [ya, yb] = AUX_Y[i];
        gates.push(Gate::H { qubit: AUX_W[i] });
        gates.push(Gate::Cnot { control: ETA[i], target: ya });
        if keys[i] & 1 == 0 {
            gates.push(Gate::Cnot { control: AUX_W[i], target: yb });
        } else {
            gates.push(Gate::Cnot { control: AUX_W[i], target: ya });
        }
    }
    gates
}

/// The full abstract circuit run by an honest prover.
pub fn delegation_circuit(alpha: f64, keys: [u8; 2]) -> Vec<Gate> {
    let mut g = eta_circuit(alpha);
    g.extend(entangling_block(keys));
    g
}

/// `|phi_{k1,k2}>` on eight qubits, followed by depolarizing noise of rate
/// `lambda` on every qubit when `lambda > 0`.
pub fn prover_prepare(alpha: f64, keys: [u8; 2], lambda: f64) -> Result<QuantumState, SimError> {
    let mut s = QuantumState::zero(NUM_QUBITS)?.with_labels(super::layout::LABELS);
    s.apply_gates(&delegation_circuit(alpha, keys))?;
    if lambda > 0.0 {
        s.depolarize_all(lambda)?;
    }
    Ok(s)
}

#[inline]
pub(crate) fn bit(index: usize, q: usize) -> u8 {
    (index >> (NUM_QUBITS - 1 - q) & 1) as u8
}

/// `(y1, y2)` read off an eight-bit outcome index.
pub(crate) fn commitment_bits(index: usize) -> [[u8; 2]; 2] {
    [[bit(index, AUX_Y[0][0]), bit(index, AUX_Y[0][1])], [bit(index, AUX_Y[1][0]), bit(index, AUX_Y[1][1])]]
}

/// `(q13, q26)` read off an eight-bit outcome index.
pub(crate) fn reply_bits(index: usize) -> [[u8; 2]; 2] {
    [[bit(index, ETA[0]), bit(index, AUX_W[0])], [bit(index, ETA[1]), bit(index, AUX_W[1])]]
}

/// Joint outcome distributions of the prepared state for both round types.
///
/// Commitment and round measurements act on disjoint qubits, so sampling
/// the commitment from its marginal and the reply from the conditional is
/// the same as measuring sequentially with collapse.
#[derive(Debug, Clone)]
pub struct PreparedDistributions {
    /// Z on all eight qubits.
    pub test: Vec<f64>,
    /// Z on the output auxiliaries, X on qubits (1,3) and (2,6).
    pub measure: Vec<f64>,
}

impl PreparedDistributions {
    pub fn new(alpha: f64, keys: [u8; 2], lambda: f64) -> Result<Self, SimError> {
        let state = prover_prepare(alpha, keys, lambda)?;
        Self::from_state(&state)
    }

    pub fn from_state(state: &QuantumState) -> Result<Self, SimError> {
        let all: Vec<usize> = (0..NUM_QUBITS).collect();
        let test = state.outcome_distribution(&all, crate::qsim::Basis::Z)?;
        let mut rotated = state.clone();
        for q in [ETA[0], AUX_W[0], ETA[1], AUX_W[1]] {
            rotated.apply_gate(&Gate::H { qubit: q })?;
        }
        let measure = rotated.outcome_distribution(&all, crate::qsim::Basis::Z)?;
        Ok(Self { test, measure })
    }

    pub fn round(&self, kind: RoundKind) -> &[f64] {
        match kind {
            RoundKind::Test => &self.test,
            RoundKind::Measure => &self.measure,
        }
    }

    fn sample_commitment(&self, rng: &mut SimRng) -> [[u8; 2]; 2] {
        let i = crate::qsim::sample_index(&self.test, rng);
        commitment_bits(i)
    }

    fn sample_reply(&self, kind: RoundKind, commit: [[u8; 2]; 2], rng: &mut SimRng) -> [[u8; 2]; 2] {
        let dist = self.round(kind);
        let cond: Vec<f64> =
            dist.iter().enumerate().map(|(i, &p)| if commitment_bits(i) == commit { p } else { 0.0 }).collect();
        reply_bits(crate::qsim::sample_index(&cond, rng))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProverStrategy {
    /// Prepares the history state and follows the protocol.
    Honest,
    /// Holds no state: commits uniformly in `{00, 10}` per qubit, answers with random bits.
    Guess,
    /// Follows the protocol on the history state of `U(pi/2 - alpha)`.
    WrongAlpha,
    /// Commits honestly, then answers test rounds with fresh uniformly random `(b, x)`.
    Inconsistent,
}

impl FromStr for ProverStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "honest" => Ok(ProverStrategy::Honest),
            "guess" => Ok(ProverStrategy::Guess),
            "wrong-alpha" => Ok(ProverStrategy::WrongAlpha),
            "inconsistent" => Ok(ProverStrategy::Inconsistent),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProverConfig {
    pub strategy: ProverStrategy,
    pub lambda: f64,
    /// Forced answer; `None` answers truthfully.
    pub claim: Option<Claim>,
    pub seed: u64,
}

impl ProverConfig {
    pub fn honest(lambda: f64, seed: u64) -> Self {
        Self { strategy: ProverStrategy::Honest, lambda, claim: None, seed }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    keys: [u8; 2],
    commit: [[u8; 2]; 2],
}

/// Message-driven prover. Owns its quantum state and its own random stream.
#[derive(Debug)]
pub struct Prover {
    config: ProverConfig,
    rng: SimRng,
    alpha: Option<f64>,
    cache: HashMap<[u8; 2], Arc<PreparedDistributions>>,
    pending: Option<Pending>,
}

impl Prover {
    pub fn new(config: ProverConfig) -> Self {
        Self { config, rng: substream(config.seed, streams::PROVER), alpha: None, cache: HashMap::new(), pending: None }
    }

    pub fn config(&self) -> &ProverConfig {
        &self.config
    }

    fn prepared(&mut self, keys: [u8; 2]) -> Result<Arc<PreparedDistributions>, ProtocolError> {
        let alpha = self.alpha.ok_or_else(|| ProtocolError::Unexpected("KEYS before CIRCUIT".into()))?;
        if let Some(p) = self.cache.get(&keys) {
            return Ok(p.clone());
        }
        let p = Arc::new(PreparedDistributions::new(alpha, keys, self.config.lambda)?);
        self.cache.insert(keys, p.clone());
        Ok(p)
    }

    fn random_bits(&mut self) -> [[u8; 2]; 2] {
        let r: u8 = self.rng.random_range(0..16);
        [[r >> 3 & 1, r >> 2 & 1], [r >> 1 & 1, r & 1]]
    }

    /// Reacts to one verifier message; `None` means no reply is due.
    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>, ProtocolError> {
        match *msg {
            Message::Circuit { alpha, variant } => {
                let problem = DecisionProblem::new(alpha, variant)?;
                let claim = self.config.claim.unwrap_or(if problem.target_probability() >= 0.5 {
                    Claim::Yes
                } else {
                    Claim::No
                });
                let mut effective = match claim {
                    Claim::Yes => problem.alpha,
                    Claim::No => problem.reduce_no_claim().alpha,
                };
                if self.config.strategy == ProverStrategy::WrongAlpha {
                    effective = (FRAC_PI_2 - effective).max(0.0);
                }
                self.alpha = Some(effective);
                self.cache.clear();
                self.pending = None;
                Ok(Some(Message::Answer { claim }))
            }
            Message::Keys { k1, k2 } => {
                let keys = [k1.get(), k2.get()];
                let commit = match self.config.strategy {
                    ProverStrategy::Guess => {
                        let r: u8 = self.rng.random_range(0..4);
                        [[r >> 1 & 1, 0], [r & 1, 0]]
                    }
                    _ => {
                        let prepared = self.prepared(keys)?;
                        prepared.sample_commitment(&mut self.rng)
                    }
                };
                self.pending = Some(Pending { keys, commit });
                Ok(Some(Message::Commit { y1: bits2(commit[0]), y2: bits2(commit[1]) }))
            }
            Message::Round { round } => {
                let p = self.pending.take().ok_or_else(|| ProtocolError::Unexpected("ROUND before KEYS".into()))?;
                let reply = match (self.config.strategy, round) {
                    (ProverStrategy::Guess, _) | (ProverStrategy::Inconsistent, RoundKind::Test) => self.random_bits(),
                    _ => {
                        let prepared = self.prepared(p.keys)?;
                        prepared.sample_reply(round, p.commit, &mut self.rng)
                    }
                };
                Ok(Some(Message::Outcomes { q13: bits2(reply[0]), q26: bits2(reply[1]) }))
            }
            Message::Verdict { .. } => {
                self.pending = None;
                Ok(None)
            }
            ref other => Err(ProtocolError::Unexpected(format!("prover received {}", other.kind()))),
        }
    }
}

/// Whether `(b, x)` is consistent with the commitment under label `k`.
pub fn consistent(k: u8, b: u8, x: u8, y_bar: [u8; 2]) -> bool {
    let label = if k & 1 == 0 { FunctionLabel::OneToOne } else { FunctionLabel::TwoToOne };
    eval(label, b, x) == y_bar
}
