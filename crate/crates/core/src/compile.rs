//! Lowering of abstract circuits to the trapped-ion gate set
//! `{RX, RY, RZ, MS(-pi/2)}`, gate accounting and multiplicative fidelity budgets.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

use crate::protocol::layout::{AUX_W, ETA};
use crate::protocol::{delegation_circuit, eta_circuit, EnergyEstimate};
use crate::qsim::{rotation_x, rotation_y, rotation_z, Gate, QuantumState, SimError};

/// Angle of every native entangling gate.
pub const MS_ANGLE: f64 = -FRAC_PI_2;

/// Tolerance for recognising identities and rotation axes during resynthesis.
const SYNTH_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("gate {0} is not part of the {1} gate set")]
    UnsupportedGate(&'static str, &'static str),
    #[error("expected a {expected} circuit")]
    WrongLevel { expected: &'static str },
    #[error("circuit uses {needed} MS gates but only {given} pair fidelities were supplied")]
    NotEnoughPairFidelities { needed: usize, given: usize },
    #[error("fidelity {0} outside [0, 1]")]
    FidelityOutOfRange(f64),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Abstract,
    Native,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitIR {
    num_qubits: usize,
    level: Level,
    gates: Vec<Gate>,
}

fn native_gate(g: &Gate) -> bool {
    match *g {
        Gate::Rx { .. } | Gate::Ry { .. } | Gate::Rz { .. } => true,
        Gate::Ms { theta, .. } => (theta - MS_ANGLE).abs() < 1e-12,
        _ => false,
    }
}

fn abstract_gate(g: &Gate) -> bool {
    matches!(g, Gate::H { .. } | Gate::X { .. } | Gate::Z { .. } | Gate::Cnot { .. } | Gate::Cu { .. })
}

impl CircuitIR {
    pub fn new(num_qubits: usize, level: Level, gates: Vec<Gate>) -> Result<Self, CompileError> {
        for g in &gates {
            g.validate(num_qubits)?;
            let ok = match level {
                Level::Abstract => abstract_gate(g),
                Level::Native => native_gate(g),
            };
            if !ok {
                let set = if level == Level::Abstract { "abstract" } else { "native" };
                return Err(CompileError::UnsupportedGate(g.name(), set));
            }
        }
        Ok(Self { num_qubits, level, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Dense unitary, column-major (`u[col][row]`).
    pub fn unitary(&self) -> Result<Vec<Vec<C64>>, CompileError> {
        let dim = 1usize << self.num_qubits;
        let mut cols = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut s = QuantumState::basis(self.num_qubits, j)?;
            s.apply_gates(&self.gates)?;
            cols.push(s.amplitudes().expect("pure state").to_vec());
        }
        Ok(cols)
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g {
                Gate::Ms { .. } => c.ms += 1,
                Gate::Rx { .. } => c.rx += 1,
                Gate::Ry { .. } => c.ry += 1,
                Gate::Rz { .. } => c.rz += 1,
                _ => c.other += 1,
            }
        }
        c.single = c.rx + c.ry + c.rz;
        c
    }

    /// Qubit pairs of the MS gates in order of appearance.
    pub fn ms_pairs(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match *g {
                Gate::Ms { a, b, .. } => Some((a, b)),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.gates.iter().map(gate_json).collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub ms: usize,
    pub single: usize,
    pub rx: usize,
    pub ry: usize,
    pub rz: usize,
    /// Gates outside the native set (zero after lowering).
    pub other: usize,
}

/// `{"gate": "MS", "targets": [i, j], "theta": -1.5707963}`.
pub fn gate_json(g: &Gate) -> serde_json::Value {
    let theta = match *g {
        Gate::Rx { theta, .. } | Gate::Ry { theta, .. } | Gate::Rz { theta, .. } | Gate::Ms { theta, .. } => Some(theta),
        Gate::U { alpha, .. } | Gate::Cu { alpha, .. } => Some(alpha),
        _ => None,
    };
    let mut obj = serde_json::json!({ "gate": g.name(), "targets": g.qubits() });
    if let Some(t) = theta {
        obj["theta"] = serde_json::json!(t);
    }
    obj
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn gate(self, qubit: usize, theta: f64) -> Gate {
        match self {
            Axis::X => Gate::Rx { qubit, theta },
            Axis::Y => Gate::Ry { qubit, theta },
            Axis::Z => Gate::Rz { qubit, theta },
        }
    }

    fn matrix(self, theta: f64) -> [C64; 4] {
        match self {
            Axis::X => rotation_x(theta),
            Axis::Y => rotation_y(theta),
            Axis::Z => rotation_z(theta),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Levi-Civita symbol on axis indices.
fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn mul2(a: &[C64; 4], b: &[C64; 4]) -> [C64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

const I2: [C64; 4] = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];

/// Writes `u` (up to phase) as `w I - i (u_x X + u_y Y + u_z Z)` with real
/// `w` and `u`.
fn su2_components(u: &[C64; 4]) -> (f64, [f64; 3]) {
    let det = u[0] * u[3] - u[1] * u[2];
    let s = det.sqrt();
    let v = u.map(|x| x / s);
    let w = (v[0] + v[3]) / 2.0;
    let i = C64::new(0.0, 1.0);
    let ux = i * (v[1] + v[2]) / 2.0;
    let uy = i * (i * v[1] - i * v[2]) / 2.0;
    let uz = i * (v[0] - v[3]) / 2.0;
    (w.re, [ux.re, uy.re, uz.re])
}

/// Equality of 2x2 (or larger, flattened) matrices up to a global phase.
fn equal_up_to_phase(a: &[C64], b: &[C64], tol: f64) -> bool {
    let (k, _) = b.iter().enumerate().fold((0, 0.0), |acc, (i, x)| if x.norm() > acc.1 { (i, x.norm()) } else { acc });
    if b[k].norm() < tol {
        return a.iter().all(|x| x.norm() < tol);
    }
    let phase = a[k] / b[k];
    if (phase.norm() - 1.0).abs() > tol {
        return false;
    }
    a.iter().zip(b).all(|(x, y)| (x - phase * y).norm() < tol)
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Shortest `{RX, RY, RZ}` sequence (time order) for a single-qubit unitary:
/// none, one rotation, two rotations about different axes, or Z-Y-Z Euler
/// angles.
pub fn resynthesize(u: &[C64; 4]) -> Vec<(char, f64)> {
    synth(u).into_iter().map(|(a, t)| (['X', 'Y', 'Z'][a.index()], t)).collect()
}

fn synth(u: &[C64; 4]) -> Vec<(Axis, f64)> {
    let (w, v) = su2_components(u);
    if v.iter().all(|x| x.abs() < SYNTH_TOL) {
        return Vec::new();
    }
    for a in Axis::ALL {
        let others = Axis::ALL.iter().filter(|&&b| b != a).all(|b| v[b.index()].abs() < SYNTH_TOL);
        if others {
            let theta = wrap_angle(2.0 * v[a.index()].atan2(w));
            return vec![(a, theta)];
        }
    }
    for a in Axis::ALL {
        for b in Axis::ALL {
            if a == b {
                continue;
            }
            let c = 3 - a.index() - b.index();
            let eps = levi_civita(a.index(), b.index(), c);
            if (w * v[c] + eps * v[a.index()] * v[b.index()]).abs() > SYNTH_TOL {
                continue;
            }
            let half_a = if w.hypot(v[a.index()]) > 1e-6 {
                v[a.index()].atan2(w)
            } else {
                (-eps * v[c]).atan2(v[b.index()])
            };
            let half_b = if w.hypot(v[b.index()]) > 1e-6 {
                v[b.index()].atan2(w)
            } else {
                (-eps * v[c]).atan2(v[a.index()])
            };
            let seq = vec![(a, wrap_angle(2.0 * half_a)), (b, wrap_angle(2.0 * half_b))];
            if equal_up_to_phase(&sequence_matrix(&seq), u, 1e-8) {
                return seq.into_iter().filter(|(_, t)| t.abs() > SYNTH_TOL).collect();
            }
        }
    }
    // Z-Y-Z: u = RZ(g) RY(b) RZ(a) up to phase.
    let det = u[0] * u[3] - u[1] * u[2];
    let s = det.sqrt();
    let (p, q) = (u[0] / s, u[2] / s);
    let beta = 2.0 * q.norm().atan2(p.norm());
    let sum = -2.0 * p.arg();
    let diff = 2.0 * q.arg();
    let (alpha, gamma) = ((sum - diff) / 2.0, (sum + diff) / 2.0);
    vec![(Axis::Z, wrap_angle(alpha)), (Axis::Y, wrap_angle(beta)), (Axis::Z, wrap_angle(gamma))]
}

fn sequence_matrix(seq: &[(Axis, f64)]) -> [C64; 4] {
    seq.iter().fold(I2, |acc, &(a, t)| mul2(&a.matrix(t), &acc))
}

fn single_matrix(g: &Gate) -> [C64; 4] {
    match g.matrix() {
        crate::qsim::GateMatrix::One(m) => m,
        crate::qsim::GateMatrix::Two(_) => unreachable!("two-qubit gate in a single-qubit run"),
    }
}

/// Fixed templates, in time order.
fn expand(g: &Gate) -> Vec<Gate> {
    match *g {
        Gate::H { qubit } => vec![Gate::Rz { qubit, theta: PI }, Gate::Ry { qubit, theta: FRAC_PI_2 }],
        Gate::X { qubit } => vec![Gate::Rx { qubit, theta: PI }],
        Gate::Z { qubit } => vec![Gate::Rz { qubit, theta: PI }],
        Gate::Cnot { control, target } => cnot_template(control, target),
        Gate::Cu { control, target, alpha } => {
            let mut v = vec![Gate::Ry { qubit: target, theta: FRAC_PI_2 - alpha }];
            v.extend(cnot_template(control, target));
            v.push(Gate::Ry { qubit: target, theta: alpha - FRAC_PI_2 });
            v
        }
        other => vec![other],
    }
}

/// One MS gate and four single-qubit rotations.
pub fn cnot_template(control: usize, target: usize) -> Vec<Gate> {
    vec![
        Gate::Ry { qubit: control, theta: -FRAC_PI_2 },
        Gate::Ms { a: control, b: target, theta: MS_ANGLE },
        Gate::Rx { qubit: control, theta: FRAC_PI_2 },
        Gate::Ry { qubit: control, theta: FRAC_PI_2 },
        Gate::Rx { qubit: target, theta: -FRAC_PI_2 },
    ]
}

/// Template expansion without merging.
pub fn expand_templates(circuit: &CircuitIR) -> Result<CircuitIR, CompileError> {
    if circuit.level != Level::Abstract {
        return Err(CompileError::WrongLevel { expected: "abstract" });
    }
    let gates = circuit.gates.iter().flat_map(expand).collect();
    CircuitIR::new(circuit.num_qubits, Level::Native, gates)
}

/// Merges maximal single-qubit runs left to right and resynthesizes each
/// run into at most three rotations. A run on a qubit is emitted when an MS
/// gate touches that qubit; the remaining runs are emitted at the end in
/// qubit order.
pub fn merge_single_qubit_runs(circuit: &CircuitIR) -> Result<CircuitIR, CompileError> {
    if circuit.level != Level::Native {
        return Err(CompileError::WrongLevel { expected: "native" });
    }
    let n = circuit.num_qubits;
    let mut pending: Vec<Option<[C64; 4]>> = vec![None; n];
    let mut out = Vec::new();
    let flush = |q: usize, pending: &mut Vec<Option<[C64; 4]>>, out: &mut Vec<Gate>| {
        if let Some(m) = pending[q].take() {
            out.extend(synth(&m).into_iter().map(|(a, t)| a.gate(q, t)));
        }
    };
    for g in &circuit.gates {
        if g.is_single_qubit() {
            let q = g.qubits()[0];
            let m = single_matrix(g);
            pending[q] = Some(mul2(&m, &pending[q].unwrap_or(I2)));
        } else {
            for q in g.qubits() {
                flush(q, &mut pending, &mut out);
            }
            out.push(*g);
        }
    }
    for q in 0..n {
        flush(q, &mut pending, &mut out);
    }
    CircuitIR::new(n, Level::Native, out)
}

/// Template expansion followed by run merging.
pub fn lower(circuit: &CircuitIR) -> Result<CircuitIR, CompileError> {
    merge_single_qubit_runs(&expand_templates(circuit)?)
}

/// Unitary equality up to global phase (max-abs deviation below `tol`).
pub fn equivalent_up_to_phase(a: &CircuitIR, b: &CircuitIR, tol: f64) -> Result<bool, CompileError> {
    if a.num_qubits != b.num_qubits {
        return Ok(false);
    }
    let ua: Vec<C64> = a.unitary()?.into_iter().flatten().collect();
    let ub: Vec<C64> = b.unitary()?.into_iter().flatten().collect();
    Ok(equal_up_to_phase(&ua, &ub, tol))
}

/// Rotations moving qubits (1,3) and (2,6) into the X basis for a
/// measurement round.
fn measurement_rotations() -> Vec<Gate> {
    [ETA[0], AUX_W[0], ETA[1], AUX_W[1]].into_iter().map(|qubit| Gate::H { qubit }).collect()
}

/// The eight-qubit delegation circuit for `keys` including the
/// measurement-round basis change.
pub fn verification_circuit(alpha: f64, keys: [u8; 2]) -> Result<CircuitIR, CompileError> {
    let mut g = delegation_circuit(alpha, keys);
    g.extend(measurement_rotations());
    CircuitIR::new(crate::protocol::layout::NUM_QUBITS, Level::Abstract, g)
}

/// Two-qubit eta preparation followed by `H` on each qubit measured in X
/// (`k_i = 1`).
pub fn eta_only_circuit(alpha: f64, keys: [u8; 2]) -> Result<CircuitIR, CompileError> {
    let mut g = eta_circuit(alpha);
    for (i, &k) in keys.iter().enumerate() {
        if k & 1 == 1 {
            g.push(Gate::H { qubit: ETA[i] });
        }
    }
    CircuitIR::new(2, Level::Abstract, g)
}

/// Single-gate fidelity and MS pair fidelities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub single_gate_fidelity: f64,
    /// Assigned to MS gates in order of appearance.
    pub ms_fidelities: Vec<f64>,
}

impl Default for ErrorBudget {
    fn default() -> Self {
        Self { single_gate_fidelity: 0.998, ms_fidelities: vec![0.982, 0.976, 0.977, 0.976, 0.984] }
    }
}

impl ErrorBudget {
    pub fn validate(&self) -> Result<(), CompileError> {
        for &f in std::iter::once(&self.single_gate_fidelity).chain(&self.ms_fidelities) {
            if !(0.0..=1.0).contains(&f) {
                return Err(CompileError::FidelityOutOfRange(f));
            }
        }
        Ok(())
    }
}

/// `F_1^singles * prod` of the first `ms` pair fidelities.
pub fn fidelity_for_counts(budget: &ErrorBudget, singles: usize, ms: usize) -> Result<f64, CompileError> {
    budget.validate()?;
    if ms > budget.ms_fidelities.len() {
        return Err(CompileError::NotEnoughPairFidelities { needed: ms, given: budget.ms_fidelities.len() });
    }
    let pairs: f64 = budget.ms_fidelities[..ms].iter().product();
    Ok(budget.single_gate_fidelity.powi(singles as i32) * pairs)
}

/// Multiplicative fidelity estimate of a native circuit.
pub fn fidelity_product(budget: &ErrorBudget, circuit: &CircuitIR) -> Result<f64, CompileError> {
    if circuit.level != Level::Native {
        return Err(CompileError::WrongLevel { expected: "native" });
    }
    let c = circuit.counts();
    fidelity_for_counts(budget, c.single, c.ms)
}

/// Bell-state fidelity `(<Z1 Z2> + <X1 X2>) / 2`.
pub fn bell_fidelity_estimate(zz: f64, xx: f64) -> f64 {
    (zz + xx) / 2.0
}

/// [`bell_fidelity_estimate`] from an energy estimate taken at `alpha = pi/2`.
pub fn bell_fidelity_from(estimate: &EnergyEstimate) -> f64 {
    bell_fidelity_estimate(estimate.expectations.zz, estimate.expectations.xx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_unitaries() -> Vec<[C64; 4]> {
        let mut out = Vec::new();
        for (a, b, c) in [(0.3, 1.1, -0.7), (PI, 0.2, 0.0), (0.0, FRAC_PI_2, 0.0), (1.0, 0.0, 2.0), (-2.5, 3.0, 0.4)] {
            out.push(mul2(&rotation_z(c), &mul2(&rotation_y(b), &rotation_z(a))));
            out.push(mul2(&rotation_x(c), &mul2(&rotation_z(b), &rotation_y(a))));
        }
        out
    }

    #[test]
    fn resynthesis_reproduces_unitary() {
        for u in random_unitaries() {
            let seq = synth(&u);
            assert!(seq.len() <= 3);
            assert!(equal_up_to_phase(&sequence_matrix(&seq), &u, 1e-9), "{seq:?}");
        }
    }

    #[test]
    fn short_forms_are_found() {
        assert!(synth(&I2).is_empty());
        assert_eq!(synth(&rotation_x(0.4)).len(), 1);
        let two = mul2(&rotation_z(0.9), &rotation_x(0.4));
        assert_eq!(synth(&two).len(), 2);
    }

    #[test]
    fn cnot_template_is_a_cnot() {
        let native = CircuitIR::new(2, Level::Native, cnot_template(0, 1)).unwrap();
        let cnot = CircuitIR { num_qubits: 2, level: Level::Abstract, gates: vec![Gate::Cnot { control: 0, target: 1 }] };
        assert!(equivalent_up_to_phase(&native, &cnot, 1e-12).unwrap());
        assert_eq!(native.counts().ms, 1);
        assert_eq!(native.counts().single, 4);
    }

    #[test]
    fn budget_arithmetic() {
        let b = ErrorBudget::default();
        assert_eq!(fidelity_for_counts(&b, 0, 0).unwrap(), 1.0);
        assert!(fidelity_for_counts(&b, 0, 6).is_err());
        assert_eq!(bell_fidelity_estimate(1.0, 1.0), 1.0);
    }
}
