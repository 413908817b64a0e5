//! The interactive protocol: wire messages, verifier and prover state
//! machines, transports, exact round statistics and energy estimation.
//!
//! A session is one CIRCUIT/ANSWER exchange followed by any number of rounds.
//! Each round is KEYS, COMMIT, ROUND, OUTCOMES, VERDICT; the per-round
//! VERDICT is `continue` or `reject`, and the session ends with a final
//! `accept` or `reject`.

mod estimate;
mod exact;
mod extended;
mod messages;
mod prover;
mod quantumness;
mod transport;
mod verifier;

pub use estimate::{
    basis_index, energy_from_tallies, estimate_energy, estimate_expectations, estimate_from_tallies,
    term_expectation, BasisTally, EnergyEstimate, EnergyVerdict, Expectations, RESAMPLES,
};
pub use exact::{exact_energy, exact_round_stats, exact_tallies, ExactRoundStats};
pub use extended::{
    extended_protocol, run_extended, term_sign, thresholds_for, ExtendedConfig, ExtendedRunStats, TermSample,
    BOOTSTRAP_RESAMPLES,
};
pub use messages::{Bit, Claim, Message, RejectReason, RoundKind, VerdictKind};
pub use prover::{
    consistent, delegation_circuit, entangling_block, eta_circuit, prover_prepare, PreparedDistributions, Prover,
    ProverConfig, ProverStrategy,
};
pub use quantumness::{
    quantumness_demo, quantumness_exact_density, QuantumnessProver, QuantumnessResult, TwoToOneFunction,
    MAX_INPUT_BITS,
};
pub use transport::{serve, CaptureWriter, LineTransport, Loopback, Transport};
pub use verifier::{
    check_outcomes, commitment_valid, read_transcript, run_session, write_transcript, RoundPolicy, RoundRecord,
    Sidecar, VerifierSession,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonian::{DecisionProblem, HamiltonianError};
use crate::qsim::SimError;

/// Qubit positions of the eight-qubit register.
///
/// Position `p` holds the qubit numbered `p + 1` in the usual circuit diagram:
/// the two eta-qubits first, then auxiliaries 3 to 8.
pub mod layout {
    pub const NUM_QUBITS: usize = 8;
    /// System qubit and clock qubit of `|eta>`.
    pub const ETA: [usize; 2] = [0, 1];
    /// The `w` auxiliary of each eta-qubit (qubits 3 and 6).
    pub const AUX_W: [usize; 2] = [2, 5];
    /// The two output auxiliaries of each eta-qubit (qubits 4,5 and 7,8).
    pub const AUX_Y: [[usize; 2]; 2] = [[3, 4], [6, 7]];
    pub const LABELS: [&str; 8] = ["eta1", "eta2", "aux3", "aux4", "aux5", "aux6", "aux7", "aux8"];
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("transport failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("peer closed the connection")]
    Closed,
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unexpected message: {0}")]
    Unexpected(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

impl ProtocolError {
    /// Failures of the byte stream itself, as opposed to a misbehaving peer.
    pub fn is_transport(&self) -> bool {
        matches!(self, ProtocolError::Io(_) | ProtocolError::Closed)
    }
}

/// Settings shared by a batch of sessions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub problem: DecisionProblem,
    /// Rounds per basis setting.
    pub shots: u64,
    pub lambda: f64,
    pub seed: u64,
    pub round_policy: RoundPolicy,
    pub claim: Claim,
    pub strategy: ProverStrategy,
}

impl SessionConfig {
    pub fn new(problem: DecisionProblem, shots: u64, lambda: f64, seed: u64) -> Self {
        Self {
            problem,
            shots,
            lambda,
            seed,
            round_policy: RoundPolicy::Auto,
            claim: Claim::Yes,
            strategy: ProverStrategy::Honest,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.shots == 0 {
            return Err(ProtocolError::Config("shots must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(ProtocolError::Config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        Ok(())
    }

    pub fn prover_config(&self, seed: u64) -> ProverConfig {
        ProverConfig { strategy: self.strategy, lambda: self.lambda, claim: Some(self.claim), seed }
    }
}
