//! Term-sampling energy test: the verifier samples Pauli terms with weight
//! `|c_l| / c`, runs one round per copy in the basis the term needs, and turns
//! each measured term into a bit `r(l)` with `<r> = (1 + <H>/c) / 2`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::estimate::basis_index;
use super::messages::{Claim, RejectReason, RoundKind, VerdictKind};
use super::prover::{Prover, ProverConfig, ProverStrategy};
use super::transport::{Loopback, Transport};
use super::verifier::{RoundPolicy, VerifierSession};
use super::ProtocolError;
use crate::hamiltonian::{build_fixed_h, fixed_parts, DecisionProblem, REFUTE_THRESHOLD, VERIFY_THRESHOLD};
use crate::hamiltonian::{DEFAULT_J_IN, DEFAULT_J_PROP};
use crate::pauli::{Pauli, PauliString};
use crate::rng::{streams, substream};
use crate::trapdoor::label_for_pauli;

/// Bootstrap resamples for `Prob(r_est < T0)`.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedConfig {
    pub problem: DecisionProblem,
    /// Number of sampled terms `N`.
    pub n_terms: usize,
    /// Copies per sampled term; `r(l)` is the majority over the measured ones.
    pub repetitions: usize,
    pub lambda: f64,
    pub seed: u64,
    pub round_policy: RoundPolicy,
    pub strategy: ProverStrategy,
    /// Forced prover answer; `None` answers truthfully.
    pub claim: Option<Claim>,
}

impl ExtendedConfig {
    pub fn new(problem: DecisionProblem, n_terms: usize, lambda: f64, seed: u64) -> Self {
        Self {
            problem,
            n_terms,
            repetitions: 1,
            lambda,
            seed,
            round_policy: RoundPolicy::Auto,
            strategy: ProverStrategy::Honest,
            claim: None,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n_terms == 0 {
            return Err(ProtocolError::Config("n_terms must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(ProtocolError::Config("repetitions must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(ProtocolError::Config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        Ok(())
    }

    pub fn prover_config(&self) -> ProverConfig {
        ProverConfig { strategy: self.strategy, lambda: self.lambda, claim: self.claim, seed: self.seed }
    }
}

/// One sampled term and what became of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSample {
    pub pauli: PauliString,
    pub coeff: f64,
    pub keys: [u8; 2],
    /// Measurement copies that were accepted.
    pub measured: usize,
    /// `None` when no copy of this term was an accepted measurement round.
    pub r: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedRunStats {
    pub claim: Claim,
    pub original_alpha: f64,
    pub effective_alpha: f64,
    /// `sum |c_l|` over the merged term list, identity included.
    pub c: f64,
    /// Same sum before merging the parts `H_out`, `J_in H_in`, `J_prop H_prop`.
    pub c_unmerged: f64,
    pub t0: f64,
    pub t1: f64,
    pub n_terms: usize,
    pub samples: Vec<TermSample>,
    /// Terms that produced an `r` bit.
    pub r_count: usize,
    pub r_est: f64,
    pub r_err: f64,
    /// Empirical basis-choice weights `v_h`, indexed by `2 k1 + k2`.
    pub v: [f64; 4],
    pub test_rounds: [u64; 4],
    pub measure_rounds: [u64; 4],
    pub p_t: [f64; 4],
    pub p_m: [f64; 4],
    /// Bootstrap estimate of `Prob(r_est < T0)`.
    pub prob_below_t0: f64,
    /// `1/2 sum_h v_h (1 - p_t,h) + 1/2 sum_h v_h (1 - p_m,h) Prob(r_est < T0)`.
    pub p_accept: f64,
    pub verdict: VerdictKind,
    pub reason: Option<RejectReason>,
}

/// Rescaled thresholds `((1 + 0.4/c)/2, (1 + 0.5/c)/2)`.
pub fn thresholds_for(c: f64) -> (f64, f64) {
    ((1.0 + VERIFY_THRESHOLD / c) / 2.0, (1.0 + REFUTE_THRESHOLD / c) / 2.0)
}

/// `m(l)`: product of `(-1)^{m_i}` over the non-identity factors, `+1` for
/// the identity string.
pub fn term_sign(pauli: &PauliString, decoded: [u8; 2]) -> i8 {
    let mut sign = 1i8;
    for (i, &p) in pauli.factors().iter().enumerate() {
        if p != Pauli::I && decoded[i] == 1 {
            sign = -sign;
        }
    }
    sign
}

/// Basis setting that measures `pauli`.
fn keys_for(pauli: &PauliString) -> Result<[u8; 2], ProtocolError> {
    let f = pauli.factors();
    let k = |p: Pauli| label_for_pauli(p).map(|l| l.bit()).map_err(|e| ProtocolError::Config(e.to_string()));
    Ok([k(f[0])?, k(f[1])?])
}

/// Runs the term-sampling protocol over an already opened session and closes
/// it with the final verdict. Term choices come from the verifier's stream.
pub fn run_extended<T: Transport>(
    session: &mut VerifierSession<T>,
    n_terms: usize,
    repetitions: usize,
    policy: RoundPolicy,
    seed: u64,
) -> Result<ExtendedRunStats, ProtocolError> {
    let problem = session.effective_problem();
    let h = build_fixed_h(&problem);
    let parts = fixed_parts(&problem);
    let c = h.l1_norm();
    let c_unmerged = parts.h_out.l1_norm() + DEFAULT_J_IN * parts.h_in.l1_norm() + DEFAULT_J_PROP * parts.h_prop.l1_norm();
    let (t0, t1) = thresholds_for(c);
    let terms = h.terms().to_vec();
    let weights = WeightedIndex::new(terms.iter().map(|t| t.coeff.abs()))
        .map_err(|e| ProtocolError::Config(format!("term weights: {e}")))?;

    let mut samples = Vec::with_capacity(n_terms);
    let mut chosen = [0u64; 4];
    let mut test_rounds = [0u64; 4];
    let mut test_rejects = [0u64; 4];
    let mut measure_rounds = [0u64; 4];
    let mut measure_rejects = [0u64; 4];
    let mut first_reason = None;

    for _ in 0..n_terms {
        let term = &terms[weights.sample(session.rng())];
        let keys = keys_for(&term.pauli)?;
        let hidx = basis_index(keys);
        chosen[hidx] += 1;
        let s = if term.coeff >= 0.0 { 1 } else { -1 };
        let mut hits = 0usize;
        let mut measured = 0usize;
        for _ in 0..repetitions {
            let rec = session.round(keys, policy)?;
            let rejected = rec.verdict == VerdictKind::Reject;
            if rejected && first_reason.is_none() {
                first_reason = rec.reject_reason;
            }
            match rec.round {
                RoundKind::Test => {
                    test_rounds[hidx] += 1;
                    test_rejects[hidx] += u64::from(rejected);
                }
                RoundKind::Measure => {
                    measure_rounds[hidx] += 1;
                    measure_rejects[hidx] += u64::from(rejected);
                    if let Some(d) = rec.decoded {
                        measured += 1;
                        if term_sign(&term.pauli, d) == s {
                            hits += 1;
                        }
                    }
                }
            }
        }
        // Strict majority; an even split counts as 0.
        let r = (measured > 0).then(|| u8::from(2 * hits > measured));
        samples.push(TermSample { pauli: term.pauli.clone(), coeff: term.coeff, keys, measured, r });
    }

    let bits: Vec<f64> = samples.iter().filter_map(|s| s.r).map(f64::from).collect();
    let r_count = bits.len();
    let (r_est, r_err) = if r_count > 0 {
        let mean = bits.iter().sum::<f64>() / r_count as f64;
        (mean, (mean * (1.0 - mean) / r_count as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };

    let mut boot = substream(seed, streams::RESAMPLING);
    let prob_below_t0 = if r_count > 0 {
        let below = (0..BOOTSTRAP_RESAMPLES)
            .filter(|_| {
                let ones: usize = (0..r_count).map(|_| bits[boot.random_range(0..r_count)] as usize).sum();
                (ones as f64 / r_count as f64) < t0
            })
            .count();
        below as f64 / BOOTSTRAP_RESAMPLES as f64
    } else {
        0.0
    };

    let frac = |num: u64, den: u64| if den > 0 { num as f64 / den as f64 } else { 0.0 };
    let v: [f64; 4] = std::array::from_fn(|i| frac(chosen[i], n_terms as u64));
    let p_t: [f64; 4] = std::array::from_fn(|i| frac(test_rejects[i], test_rounds[i]));
    let p_m: [f64; 4] = std::array::from_fn(|i| frac(measure_rejects[i], measure_rounds[i]));
    let p_accept = 0.5 * (0..4).map(|i| v[i] * (1.0 - p_t[i])).sum::<f64>()
        + 0.5 * (0..4).map(|i| v[i] * (1.0 - p_m[i])).sum::<f64>() * prob_below_t0;

    let (verdict, reason) = if let Some(reason) = first_reason {
        (VerdictKind::Reject, Some(reason))
    } else if r_count > 0 && r_est <= t0 {
        (VerdictKind::Accept, None)
    } else {
        (VerdictKind::Reject, Some(RejectReason::EnergyTooHigh))
    };
    session.finish(verdict, reason)?;

    Ok(ExtendedRunStats {
        claim: session.claim(),
        original_alpha: session.original_problem().alpha,
        effective_alpha: problem.alpha,
        c,
        c_unmerged,
        t0,
        t1,
        n_terms,
        samples,
        r_count,
        r_est,
        r_err,
        v,
        test_rounds,
        measure_rounds,
        p_t,
        p_m,
        prob_below_t0,
        p_accept,
        verdict,
        reason,
    })
}

/// Runs the term-sampling protocol against an in-process prover.
pub fn extended_protocol(config: &ExtendedConfig) -> Result<ExtendedRunStats, ProtocolError> {
    config.validate()?;
    let prover = Prover::new(config.prover_config());
    let mut session = VerifierSession::open(Loopback::new(prover), config.problem, config.seed)?;
    run_extended(&mut session, config.n_terms, config.repetitions, config.round_policy, config.seed)
}
