use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::messages::{raw2, Bit, Claim, Message, RejectReason, RoundKind, VerdictKind};
use super::prover::{consistent, Prover};
use super::transport::{Loopback, Transport};
use super::{ProtocolError, SessionConfig};
use crate::hamiltonian::DecisionProblem;
use crate::rng::{streams, substream, SimRng};
use crate::trapdoor::{Commitment, FunctionLabel, TrapdoorKeyPair};

/// How the verifier picks the round type after a commitment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundPolicy {
    /// Fair coin per round.
    Auto,
    ForceTest,
    ForceMeasure,
}

impl FromStr for RoundPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(RoundPolicy::Auto),
            "test" | "force_test" => Ok(RoundPolicy::ForceTest),
            "measure" | "force_measure" => Ok(RoundPolicy::ForceMeasure),
            other => Err(format!("unknown round policy '{other}'")),
        }
    }
}

/// Verifier's record of one round. `decoded` is present exactly for
/// measurement rounds that were not rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: usize,
    pub keys: [u8; 2],
    pub commitment: [[u8; 2]; 2],
    pub round: RoundKind,
    pub raw_outcomes: Option<[[u8; 2]; 2]>,
    pub decoded: Option<[u8; 2]>,
    pub verdict: VerdictKind,
    pub reject_reason: Option<RejectReason>,
}

/// Verifier-private annotations written next to a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub original_alpha: f64,
    pub effective_alpha: f64,
    pub rounds: Vec<RoundRecord>,
}

/// For `k_i = 1` the commitment must lie in the range `{00, 10}`.
pub fn commitment_valid(keys: [u8; 2], commit: [[u8; 2]; 2]) -> bool {
    (0..2).all(|i| keys[i] == 0 || commit[i][1] == 0)
}

/// Checks a round's replies. Test rounds yield `Ok(None)` when consistent;
/// measurement rounds yield the decoded `(m1, m2)`.
pub fn check_outcomes(
    keys: [u8; 2],
    commit: [[u8; 2]; 2],
    round: RoundKind,
    outcomes: [[u8; 2]; 2],
    keypairs: &[TrapdoorKeyPair; 2],
) -> Result<Option<[u8; 2]>, RejectReason> {
    match round {
        RoundKind::Test => {
            for i in 0..2 {
                if !consistent(keys[i], outcomes[i][0], outcomes[i][1], commit[i]) {
                    return Err(RejectReason::TestMismatch);
                }
            }
            Ok(None)
        }
        RoundKind::Measure => {
            let mut m = [0u8; 2];
            for i in 0..2 {
                let y = Commitment { y_bar: commit[i] };
                m[i] = keypairs[i]
                    .decode(&y, outcomes[i][0], outcomes[i][1])
                    .map_err(|_| RejectReason::InvalidCommitment)?;
            }
            Ok(Some(m))
        }
    }
}

pub(crate) fn keypairs_for(keys: [u8; 2]) -> [TrapdoorKeyPair; 2] {
    let gen = |k: u8| {
        TrapdoorKeyPair::generate(if k == 0 { FunctionLabel::OneToOne } else { FunctionLabel::TwoToOne })
    };
    [gen(keys[0]), gen(keys[1])]
}

/// Verifier state machine over an arbitrary transport.
#[derive(Debug)]
pub struct VerifierSession<T: Transport> {
    transport: T,
    rng: SimRng,
    original: DecisionProblem,
    effective: DecisionProblem,
    claim: Claim,
    transcript: Vec<Message>,
    records: Vec<RoundRecord>,
    closed: bool,
}

impl<T: Transport> VerifierSession<T> {
    /// Sends the circuit and reads the prover's claim. A "no" claim is turned
    /// into the equivalent "yes" claim on `U(pi/2 - alpha)`.
    pub fn open(transport: T, problem: DecisionProblem, seed: u64) -> Result<Self, ProtocolError> {
        let mut s = Self {
            transport,
            rng: substream(seed, streams::VERIFIER),
            original: problem,
            effective: problem,
            claim: Claim::Yes,
            transcript: Vec::new(),
            records: Vec::new(),
            closed: false,
        };
        s.send(Message::Circuit { alpha: problem.alpha, variant: problem.variant })?;
        match s.recv()? {
            Message::Answer { claim } => {
                s.claim = claim;
                if claim == Claim::No {
                    s.effective = problem.reduce_no_claim();
                }
            }
            other => return Err(ProtocolError::Unexpected(format!("expected ANSWER, got {}", other.kind()))),
        }
        Ok(s)
    }

    fn send(&mut self, msg: Message) -> Result<(), ProtocolError> {
        self.transport.send(&msg)?;
        self.transcript.push(msg);
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        let m = self.transport.recv()?;
        self.transcript.push(m.clone());
        Ok(m)
    }

    fn reject(&mut self, reason: RejectReason) -> Result<(), ProtocolError> {
        self.send(Message::Verdict { verdict: VerdictKind::Reject, reason: Some(reason.as_str().to_string()) })
    }

    /// Runs one commit/challenge/response round with the given keys.
    pub fn round(&mut self, keys: [u8; 2], policy: RoundPolicy) -> Result<RoundRecord, ProtocolError> {
        let keys = [keys[0] & 1, keys[1] & 1];
        self.send(Message::Keys { k1: Bit::new(keys[0]), k2: Bit::new(keys[1]) })?;
        let commit = match self.recv()? {
            Message::Commit { y1, y2 } => [raw2(y1), raw2(y2)],
            other => return Err(ProtocolError::Unexpected(format!("expected COMMIT, got {}", other.kind()))),
        };
        let round = match policy {
            RoundPolicy::ForceTest => RoundKind::Test,
            RoundPolicy::ForceMeasure => RoundKind::Measure,
            RoundPolicy::Auto => {
                if self.rng.random_bool(0.5) {
                    RoundKind::Test
                } else {
                    RoundKind::Measure
                }
            }
        };
        let mut record = RoundRecord {
            index: self.records.len(),
            keys,
            commitment: commit,
            round,
            raw_outcomes: None,
            decoded: None,
            verdict: VerdictKind::Continue,
            reject_reason: None,
        };
        if !commitment_valid(keys, commit) {
            record.verdict = VerdictKind::Reject;
            record.reject_reason = Some(RejectReason::InvalidCommitment);
            self.reject(RejectReason::InvalidCommitment)?;
            self.records.push(record.clone());
            return Ok(record);
        }
        self.send(Message::Round { round })?;
        let outcomes = match self.recv()? {
            Message::Outcomes { q13, q26 } => [raw2(q13), raw2(q26)],
            other => return Err(ProtocolError::Unexpected(format!("expected OUTCOMES, got {}", other.kind()))),
        };
        record.raw_outcomes = Some(outcomes);
        match check_outcomes(keys, commit, round, outcomes, &keypairs_for(keys)) {
            Ok(decoded) => {
                record.decoded = decoded;
                self.send(Message::Verdict { verdict: VerdictKind::Continue, reason: None })?;
            }
            Err(reason) => {
                record.verdict = VerdictKind::Reject;
                record.reject_reason = Some(reason);
                self.reject(reason)?;
            }
        }
        self.records.push(record.clone());
        Ok(record)
    }

    /// Sends the closing verdict.
    pub fn finish(&mut self, verdict: VerdictKind, reason: Option<RejectReason>) -> Result<(), ProtocolError> {
        if self.closed {
            return Ok(());
        }
        self.closed = true;
        self.send(Message::Verdict { verdict, reason: reason.map(|r| r.as_str().to_string()) })
    }

    /// Best-effort rejection after the prover broke the protocol.
    pub fn abort_protocol_error(&mut self) {
        if !self.closed {
            self.closed = true;
            let _ = self.reject(RejectReason::ProtocolError);
        }
    }

    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    pub fn claim(&self) -> Claim {
        self.claim
    }

    pub fn original_problem(&self) -> DecisionProblem {
        self.original
    }

    /// Problem after the "no"-claim reduction.
    pub fn effective_problem(&self) -> DecisionProblem {
        self.effective
    }

    pub fn transcript(&self) -> &[Message] {
        &self.transcript
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar { original_alpha: self.original.alpha, effective_alpha: self.effective.alpha, rounds: self.records.clone() }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn into_transport(self) -> T {
        self.transport
    }
}

/// Writes the message transcript to `path` and the verifier sidecar to
/// `<path>.sidecar.json`. Returns the sidecar path.
pub fn write_transcript(path: &Path, messages: &[Message], sidecar: &Sidecar) -> std::io::Result<PathBuf> {
    let body = serde_json::to_string_pretty(messages).map_err(std::io::Error::other)?;
    std::fs::write(path, body + "\n")?;
    let mut side = path.as_os_str().to_owned();
    side.push(".sidecar.json");
    let side = PathBuf::from(side);
    let body = serde_json::to_string_pretty(sidecar).map_err(std::io::Error::other)?;
    std::fs::write(&side, body + "\n")?;
    Ok(side)
}

pub fn read_transcript(path: &Path) -> std::io::Result<Vec<Message>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}

/// One in-process round against the prover described by `config`. The
/// returned record carries the session's final verdict.
pub fn run_session(config: &SessionConfig, keys: [u8; 2]) -> Result<RoundRecord, ProtocolError> {
    config.validate()?;
    let prover = Prover::new(config.prover_config(config.seed));
    let mut session = VerifierSession::open(Loopback::new(prover), config.problem, config.seed)?;
    let mut record = session.round(keys, config.round_policy)?;
    if record.verdict != VerdictKind::Reject {
        session.finish(VerdictKind::Accept, None)?;
        record.verdict = VerdictKind::Accept;
    } else {
        session.finish(VerdictKind::Reject, record.reject_reason)?;
    }
    Ok(record)
}
