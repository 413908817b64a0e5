//! Global depolarizing noise: `Delta_lambda` on every qubit of the prepared
//! register, noisy energy curves and least-squares fits of `lambda`.
//!
//! `Delta_lambda(rho) = (1 - lambda) rho + lambda tr(rho) I / 2`, with Kraus
//! operators `sqrt(1 - 3 lambda / 4) I` and `sqrt(lambda / 4) {X, Y, Z}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveMode, CurvePoint};
use crate::directest::{direct_energy, direct_energy_exact};
use crate::hamiltonian::{DecisionProblem, HamiltonianError, Variant, VERIFY_THRESHOLD};
use crate::protocol::{estimate_energy, exact_energy, EnergyEstimate, ProtocolError, SessionConfig};
use crate::qsim::{KrausChannel, QuantumState, SimError};
use crate::rng::{mix, streams, substream, SimRng};

/// Bracket searched by [`fit_lambda`].
pub const FIT_BRACKET: (f64, f64) = (0.0, 0.2);
/// Absolute tolerance of the golden-section search.
pub const FIT_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("need at least {needed} curve points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    lambda: f64,
}

impl NoiseModel {
    pub fn new(lambda: f64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
            return Err(NoiseError::LambdaOutOfRange(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn channel(&self, target: usize) -> KrausChannel {
        KrausChannel::depolarizing(self.lambda, target)
    }

    /// Probability that none of `n` qubits is depolarized, `(1 - lambda)^n`.
    pub fn undisturbed_probability(&self, n: usize) -> f64 {
        undisturbed_probability(self.lambda, n)
    }

    /// `Delta_lambda` followed by `Delta_mu` is `Delta_nu` with `1 - nu = (1 - lambda)(1 - mu)`.
    pub fn compose(&self, other: &NoiseModel) -> NoiseModel {
        NoiseModel { lambda: compose_rates(self.lambda, other.lambda) }
    }
}

pub fn undisturbed_probability(lambda: f64, n: usize) -> f64 {
    (1.0 - lambda).powi(n as i32)
}

pub fn compose_rates(lambda: f64, mu: f64) -> f64 {
    1.0 - (1.0 - lambda) * (1.0 - mu)
}

/// Density-operator path: `Delta_lambda` on every qubit.
pub fn apply_global(state: &QuantumState, model: &NoiseModel) -> Result<QuantumState, NoiseError> {
    let mut s = state.clone();
    if model.lambda > 0.0 {
        s.depolarize_all(model.lambda)?;
    }
    Ok(s)
}

/// Trajectory path: one Kraus operator sampled per qubit. Returns the pure
/// post-channel state and the chosen operator index for each qubit
/// (0 is the identity branch).
pub fn apply_global_sampled(
    state: &QuantumState,
    model: &NoiseModel,
    rng: &mut SimRng,
) -> Result<(QuantumState, Vec<usize>), NoiseError> {
    let mut s = state.clone();
    let mut picks = Vec::with_capacity(s.num_qubits());
    for q in 0..s.num_qubits() {
        picks.push(s.apply_channel_sampled(&model.channel(q), rng)?);
    }
    Ok((s, picks))
}

/// One point of an energy curve.
pub fn curve_point(
    variant: Variant,
    alpha: f64,
    model: &NoiseModel,
    mode: CurveMode,
    shots: u64,
    seed: u64,
) -> Result<CurvePoint, NoiseError> {
    let problem = DecisionProblem::new(alpha, variant)?;
    let est: EnergyEstimate = match mode {
        CurveMode::Exact => exact_energy(&problem, model.lambda)?,
        CurveMode::DirectExact => direct_energy_exact(&problem, model.lambda)?,
        CurveMode::Delegated => estimate_energy(&SessionConfig::new(problem, shots, model.lambda, seed))?,
        CurveMode::Direct => {
            let mut rng = substream(seed, streams::SAMPLING);
            direct_energy(&problem, model.lambda, shots, &mut rng)?
        }
    };
    let shots = if mode.is_sampled() { shots } else { 0 };
    Ok(CurvePoint {
        alpha,
        e_est: est.energy,
        e_err: est.energy_err,
        lambda: model.lambda,
        variant,
        shots,
        seed: if mode.is_sampled() { seed } else { 0 },
        mode,
    })
}

/// Energy curve over `alphas`. Point `i` of a sampled curve draws from seed
/// `mix(seed, i)`; the rows record the run seed.
pub fn noisy_energy_curve(
    variant: Variant,
    model: &NoiseModel,
    alphas: &[f64],
    mode: CurveMode,
    shots: u64,
    seed: u64,
) -> Result<Vec<CurvePoint>, NoiseError> {
    alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut p = curve_point(variant, a, model, mode, shots, mix(seed, i as u64))?;
            if mode.is_sampled() {
                p.seed = seed;
            }
            Ok(p)
        })
        .collect()
}

/// Sum of squared residuals of the exact delegated model against `observed`.
pub fn fit_residual(observed: &[(f64, f64)], variant: Variant, lambda: f64) -> Result<f64, NoiseError> {
    let mut acc = 0.0;
    for &(alpha, e) in observed {
        let p = DecisionProblem::new(alpha, variant)?;
        let m = exact_energy(&p, lambda)?.energy;
        acc += (m - e).powi(2);
    }
    Ok(acc)
}

/// Least-squares `lambda` for an observed `(alpha, E)` curve: golden-section
/// search of [`fit_residual`] on [`FIT_BRACKET`] to within [`FIT_TOL`].
pub fn fit_lambda(observed: &[(f64, f64)], variant: Variant) -> Result<f64, NoiseError> {
    if observed.len() < 3 {
        return Err(NoiseError::TooFewPoints { needed: 3, got: observed.len() });
    }
    let f = |l: f64| fit_residual(observed, variant, l);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = FIT_BRACKET;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > FIT_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    // The bracket ends are candidates too; a true lambda of 0 sits on the edge.
    let mid = (a + b) / 2.0;
    let mut best = (mid, f(mid)?);
    for x in [FIT_BRACKET.0, FIT_BRACKET.1] {
        let fx = f(x)?;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best.0)
}

/// `alpha` in `[lo, hi]` where the exact delegated energy crosses `level`,
/// by bisection. Requires a sign change over the bracket.
pub fn energy_crossing(variant: Variant, lambda: f64, level: f64, lo: f64, hi: f64) -> Result<Option<f64>, NoiseError> {
    let g = |a: f64| -> Result<f64, NoiseError> {
        Ok(exact_energy(&DecisionProblem::new(a, variant)?, lambda)?.energy - level)
    };
    let (mut a, mut b) = (lo, hi);
    let (mut ga, gb) = (g(a)?, g(b)?);
    if ga.signum() == gb.signum() {
        return Ok(None);
    }
    for _ in 0..60 {
        let m = (a + b) / 2.0;
        let gm = g(m)?;
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(Some((a + b) / 2.0))
}

/// Where the "verified yes" region (`E < 0.4`) of variant P0 ends.
pub fn verification_edge(lambda: f64) -> Result<Option<f64>, NoiseError> {
    energy_crossing(Variant::P0, lambda, VERIFY_THRESHOLD, 0.0, std::f64::consts::FRAC_PI_4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_bounds() {
        assert!(NoiseModel::new(-0.1).is_err());
        assert!(NoiseModel::new(1.1).is_err());
        assert!(NoiseModel::new(0.05).is_ok());
    }

    #[test]
    fn undisturbed_eight_qubits() {
        assert!((undisturbed_probability(0.05, 8) - 0.6634).abs() < 5e-5);
    }

    #[test]
    fn zero_rate_is_identity() {
        let s = crate::hamiltonian::eta_state(0.4);
        let out = apply_global(&s, &NoiseModel::new(0.0).unwrap()).unwrap();
        assert_eq!(out.density_matrix(), s.density_matrix());
    }
}
