//! Direct energy estimation on the two-qubit eta state, without auxiliaries
//! or trapdoor-delegated measurements.

use crate::protocol::{eta_circuit, estimate_from_tallies, BasisTally, EnergyEstimate, ProtocolError};
use crate::hamiltonian::DecisionProblem;
use crate::qsim::{sample_index, Basis, Gate, QuantumState};
use crate::rng::SimRng;

/// Default repetitions per basis setting in direct mode.
pub const DEFAULT_DIRECT_SHOTS: u64 = 400;

/// `|eta(alpha)>` prepared by the two-gate circuit, with `Delta_lambda` on both qubits.
pub fn direct_state(alpha: f64, lambda: f64) -> Result<QuantumState, ProtocolError> {
    let mut s = QuantumState::zero(2)?.with_labels(["eta1", "eta2"]);
    s.apply_gates(&eta_circuit(alpha))?;
    if lambda > 0.0 {
        s.depolarize_all(lambda)?;
    }
    Ok(s)
}

/// Outcome distribution `p[m1][m2]` for basis setting `keys` (1 = X).
fn basis_distribution(state: &QuantumState, keys: [u8; 2]) -> Result<[[f64; 2]; 2], ProtocolError> {
    let mut s = state.clone();
    for (q, &k) in keys.iter().enumerate() {
        if k == 1 {
            s.apply_gate(&Gate::H { qubit: q })?;
        }
    }
    let p = s.outcome_distribution(&[0, 1], Basis::Z)?;
    Ok([[p[0], p[1]], [p[2], p[3]]])
}

/// Exact direct-mode estimate (infinitely many shots).
pub fn direct_energy_exact(problem: &DecisionProblem, lambda: f64) -> Result<EnergyEstimate, ProtocolError> {
    let state = direct_state(problem.alpha, lambda)?;
    let mut tallies = [BasisTally::default(); 4];
    for (h, t) in tallies.iter_mut().enumerate() {
        t.counts = basis_distribution(&state, [(h >> 1) as u8, (h & 1) as u8])?;
    }
    Ok(estimate_from_tallies(*problem, tallies, 0, None))
}

/// Samples `shots` outcomes in each of the four settings and assembles the
/// energy exactly as the delegated estimator does.
pub fn direct_energy(
    problem: &DecisionProblem,
    lambda: f64,
    shots: u64,
    rng: &mut SimRng,
) -> Result<EnergyEstimate, ProtocolError> {
    if shots == 0 {
        return Err(ProtocolError::Config("shots must be at least 1".into()));
    }
    let state = direct_state(problem.alpha, lambda)?;
    let mut tallies = [BasisTally::default(); 4];
    for (h, t) in tallies.iter_mut().enumerate() {
        let d = basis_distribution(&state, [(h >> 1) as u8, (h & 1) as u8])?;
        let flat = [d[0][0], d[0][1], d[1][0], d[1][1]];
        for _ in 0..shots {
            let i = sample_index(&flat, rng);
            t.counts[i >> 1][i & 1] += 1.0;
        }
    }
    Ok(estimate_from_tallies(*problem, tallies, shots, Some(rng)))
}
