use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::messages::VerdictKind;
use super::prover::Prover;
use super::transport::Loopback;
use super::verifier::{RoundPolicy, VerifierSession};
use super::{ProtocolError, SessionConfig};
use crate::hamiltonian::{build_fixed_h, DecisionProblem, PauliHamiltonian, REFUTE_THRESHOLD, VERIFY_THRESHOLD};
use crate::pauli::{Pauli, PauliString};
use crate::rng::{mix, streams, substream, SimRng};

/// Multinomial resamples used for error bars.
pub const RESAMPLES: usize = 1000;

/// Index of the basis setting `(k1, k2)`.
pub fn basis_index(keys: [u8; 2]) -> usize {
    ((keys[0] & 1) * 2 + (keys[1] & 1)) as usize
}

/// Decoded outcomes of one basis setting. Weights are counts for sampled
/// data and probabilities for exact data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BasisTally {
    /// `counts[m1][m2]` over accepted measurement rounds.
    pub counts: [[f64; 2]; 2],
    /// Measurement rounds rejected by the verifier.
    pub rejected: f64,
}

impl BasisTally {
    pub fn accepted(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn record(&mut self, decoded: Option<[u8; 2]>) {
        match decoded {
            Some([m1, m2]) => self.counts[m1 as usize][m2 as usize] += 1.0,
            None => self.rejected += 1.0,
        }
    }

    /// Fraction of rounds rejected.
    pub fn rejection_rate(&self) -> f64 {
        let total = self.accepted() + self.rejected;
        if total > 0.0 {
            self.rejected / total
        } else {
            0.0
        }
    }
}

/// Estimate of `<P>` for a two-qubit {I, X, Z} string from the basis setting
/// that measures it: the mean of `prod (-1)^{m_i}` over non-identity factors,
/// conditioned on acceptance. Returns NaN if that setting has no data.
pub fn term_expectation(pauli: &PauliString, tallies: &[BasisTally; 4]) -> f64 {
    assert_eq!(pauli.len(), 2, "two-qubit terms only");
    let f = pauli.factors();
    let label = |p: Pauli| u8::from(p == Pauli::X);
    let t = &tallies[basis_index([label(f[0]), label(f[1])])];
    if pauli.is_identity() {
        return 1.0;
    }
    let total = t.accepted();
    if total <= 0.0 {
        return f64::NAN;
    }
    let mut acc = 0.0;
    for m1 in 0..2 {
        for m2 in 0..2 {
            let mut sign = 1.0;
            if f[0] != Pauli::I && m1 == 1 {
                sign = -sign;
            }
            if f[1] != Pauli::I && m2 == 1 {
                sign = -sign;
            }
            acc += sign * t.counts[m1][m2];
        }
    }
    acc / total
}

/// `sum_l c_l <P(l)>`, identity term included exactly.
pub fn energy_from_tallies(h: &PauliHamiltonian, tallies: &[BasisTally; 4]) -> f64 {
    h.terms().iter().map(|t| t.coeff * term_expectation(&t.pauli, tallies)).sum()
}

/// The six two-qubit expectations that appear in the energy estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub z1: f64,
    pub z2: f64,
    pub zz: f64,
    pub zx: f64,
    pub xz: f64,
    pub xx: f64,
}

impl Expectations {
    pub fn from_tallies(tallies: &[BasisTally; 4]) -> Self {
        let e = |s: &str| term_expectation(&s.parse().expect("literal"), tallies);
        Self { z1: e("ZI"), z2: e("IZ"), zz: e("ZZ"), zx: e("ZX"), xz: e("XZ"), xx: e("XX") }
    }

    fn as_array(&self) -> [f64; 6] {
        [self.z1, self.z2, self.zz, self.zx, self.xz, self.xx]
    }

    fn from_array(a: [f64; 6]) -> Self {
        Self { z1: a[0], z2: a[1], zz: a[2], zx: a[3], xz: a[4], xx: a[5] }
    }
}

/// Threshold reading of an energy estimate, relative to the (reduced) "yes" claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyVerdict {
    /// `E < 0.4`.
    VerifiedYes,
    /// `E > 0.5`.
    VerifiedNo,
    Inconclusive,
}

impl EnergyVerdict {
    pub fn from_energy(e: f64) -> Self {
        if e < VERIFY_THRESHOLD {
            EnergyVerdict::VerifiedYes
        } else if e > REFUTE_THRESHOLD {
            EnergyVerdict::VerifiedNo
        } else {
            EnergyVerdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    /// Problem the Hamiltonian was built for (after any "no"-claim reduction).
    pub problem: DecisionProblem,
    pub expectations: Expectations,
    /// One-sigma errors from multinomial resampling (zero for exact data).
    pub errors: Expectations,
    pub energy: f64,
    pub energy_err: f64,
    /// Rounds per basis setting (zero for exact data).
    pub shots: u64,
    pub tallies: [BasisTally; 4],
    pub verdict: EnergyVerdict,
}

fn resample(t: &BasisTally, rng: &mut SimRng) -> BasisTally {
    let n = t.accepted().round() as u64;
    let mut out = BasisTally { rejected: t.rejected, ..Default::default() };
    if n == 0 {
        return out;
    }
    let flat = [t.counts[0][0], t.counts[0][1], t.counts[1][0], t.counts[1][1]];
    let total: f64 = flat.iter().sum();
    let mut remaining = n;
    let mut mass = 1.0;
    let mut draws = [0u64; 4];
    for (i, &c) in flat.iter().enumerate() {
        let p = c / total;
        if i == 3 || remaining == 0 {
            draws[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        draws[i] = k;
        remaining -= k;
        mass -= p;
    }
    out.counts = [[draws[0] as f64, draws[1] as f64], [draws[2] as f64, draws[3] as f64]];
    out
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Assembles an estimate from tallies. With `rng` set, error bars come from
/// [`RESAMPLES`] multinomial resamples of each setting.
pub fn estimate_from_tallies(
    problem: DecisionProblem,
    tallies: [BasisTally; 4],
    shots: u64,
    rng: Option<&mut SimRng>,
) -> EnergyEstimate {
    let h = build_fixed_h(&problem);
    let energy = energy_from_tallies(&h, &tallies);
    let expectations = Expectations::from_tallies(&tallies);
    let (errors, energy_err) = match rng {
        None => (Expectations::default(), 0.0),
        Some(rng) => {
            let mut energies = Vec::with_capacity(RESAMPLES);
            let mut exps: Vec<[f64; 6]> = Vec::with_capacity(RESAMPLES);
            for _ in 0..RESAMPLES {
                let r = [
                    resample(&tallies[0], rng),
                    resample(&tallies[1], rng),
                    resample(&tallies[2], rng),
                    resample(&tallies[3], rng),
                ];
                energies.push(energy_from_tallies(&h, &r));
                exps.push(Expectations::from_tallies(&r).as_array());
            }
            let mut errs = [0.0; 6];
            for (k, e) in errs.iter_mut().enumerate() {
                let col: Vec<f64> = exps.iter().map(|a| a[k]).collect();
                *e = std_dev(&col);
            }
            (Expectations::from_array(errs), std_dev(&energies))
        }
    };
    EnergyEstimate {
        problem,
        expectations,
        errors,
        energy,
        energy_err,
        shots,
        tallies,
        verdict: EnergyVerdict::from_energy(energy),
    }
}

/// Runs `shots` measurement rounds in each of the four basis settings
/// against an in-process prover and estimates the expectations.
pub fn estimate_expectations(config: &SessionConfig) -> Result<EnergyEstimate, ProtocolError> {
    config.validate()?;
    let mut tallies = [BasisTally::default(); 4];
    let mut effective = config.problem;
    for (h, tally) in tallies.iter_mut().enumerate() {
        let keys = [(h >> 1) as u8, (h & 1) as u8];
        let seed = mix(config.seed, h as u64);
        let prover = Prover::new(config.prover_config(seed));
        let mut session = VerifierSession::open(Loopback::new(prover), config.problem, seed)?;
        effective = session.effective_problem();
        for _ in 0..config.shots {
            let rec = session.round(keys, RoundPolicy::ForceMeasure)?;
            tally.record(rec.decoded);
        }
        match session.records().iter().find_map(|r| r.reject_reason) {
            Some(reason) => session.finish(VerdictKind::Reject, Some(reason))?,
            None => session.finish(VerdictKind::Accept, None)?,
        }
    }
    let mut rng = substream(config.seed, streams::RESAMPLING);
    Ok(estimate_from_tallies(effective, tallies, config.shots, Some(&mut rng)))
}

/// Energy estimate with the threshold verdict; see [`estimate_expectations`].
pub fn estimate_energy(config: &SessionConfig) -> Result<EnergyEstimate, ProtocolError> {
    estimate_expectations(config)
}
