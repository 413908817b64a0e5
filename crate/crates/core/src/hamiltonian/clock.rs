use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use super::{DecisionProblem, HamiltonianError, PauliHamiltonian, Variant};
use crate::pauli::Pauli;
use crate::qsim::{Gate, QuantumState, MAX_QUBITS};

pub const DEFAULT_J_IN: f64 = 6.0;
pub const DEFAULT_J_PROP: f64 = 3.0;

/// Reflected binary code.
pub fn gray(t: usize) -> usize {
    t ^ (t >> 1)
}

/// Self-adjoint gates allowed in a clock circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum ClockGate {
    /// `cos(alpha) Z + sin(alpha) X`.
    U { qubit: usize, alpha: f64 },
    Cnot { control: usize, target: usize },
}

impl ClockGate {
    fn as_gate(&self) -> Gate {
        match *self {
            ClockGate::U { qubit, alpha } => Gate::U { qubit, alpha },
            ClockGate::Cnot { control, target } => Gate::Cnot { control, target },
        }
    }

    /// The gate as a Pauli sum on the system register.
    fn operator(&self, n: usize) -> Result<PauliHamiltonian, HamiltonianError> {
        match *self {
            ClockGate::U { qubit, alpha } => Ok(PauliHamiltonian::monomial(n, alpha.cos(), &[(qubit, Pauli::Z)])?
                .add(&PauliHamiltonian::monomial(n, alpha.sin(), &[(qubit, Pauli::X)])?)),
            ClockGate::Cnot { control, target } => {
                let terms = [
                    PauliHamiltonian::constant(n, 0.5),
                    PauliHamiltonian::monomial(n, 0.5, &[(control, Pauli::Z)])?,
                    PauliHamiltonian::monomial(n, 0.5, &[(target, Pauli::X)])?,
                    PauliHamiltonian::monomial(n, -0.5, &[(control, Pauli::Z), (target, Pauli::X)])?,
                ];
                Ok(terms.iter().fold(PauliHamiltonian::zero(n), |acc, t| acc.add(t)))
            }
        }
    }
}

/// Circuit `U_T ... U_1` on `n` system qubits plus a Gray-coded clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockCircuit {
    n: usize,
    gates: Vec<ClockGate>,
    clock_bits: usize,
}

impl ClockCircuit {
    /// Uses the smallest clock register, `ceil(log2(T + 1))` bits (at least 1).
    pub fn new(n: usize, gates: Vec<ClockGate>) -> Result<Self, HamiltonianError> {
        let steps = gates.len() + 1;
        let bits = (usize::BITS - (steps - 1).leading_zeros()).max(1) as usize;
        Self::with_clock_bits(n, gates, bits)
    }

    pub fn with_clock_bits(n: usize, gates: Vec<ClockGate>, clock_bits: usize) -> Result<Self, HamiltonianError> {
        let steps = gates.len() + 1;
        if clock_bits >= usize::BITS as usize || steps > 1 << clock_bits {
            return Err(HamiltonianError::ClockTooSmall { bits: clock_bits, steps });
        }
        for g in &gates {
            match *g {
                ClockGate::U { qubit, .. } if qubit >= n => return Err(HamiltonianError::BadQubit { qubit, n }),
                ClockGate::Cnot { control, target } => {
                    for q in [control, target] {
                        if q >= n {
                            return Err(HamiltonianError::BadQubit { qubit: q, n });
                        }
                    }
                    if control == target {
                        return Err(HamiltonianError::DegenerateCnot(control));
                    }
                }
                _ => {}
            }
        }
        Ok(Self { n, gates, clock_bits })
    }

    /// The one-gate circuit `C = U(alpha)` on one system qubit.
    pub fn single_gate(alpha: f64) -> Self {
        Self::new(1, vec![ClockGate::U { qubit: 0, alpha }]).expect("valid circuit")
    }

    pub fn system_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[ClockGate] {
        &self.gates
    }

    /// `T`.
    pub fn steps(&self) -> usize {
        self.gates.len()
    }

    pub fn clock_bits(&self) -> usize {
        self.clock_bits
    }

    /// System qubits first, clock qubits after (most significant clock bit first).
    pub fn num_qubits(&self) -> usize {
        self.n + self.clock_bits
    }

    fn clock_qubit(&self, bit: usize) -> usize {
        self.n + bit
    }

    /// `|t><t|` on the clock register, `prod (1 +- Z) / 2`.
    pub fn clock_projector(&self, t: usize) -> PauliHamiltonian {
        let code = gray(t);
        let nq = self.num_qubits();
        let mut acc = PauliHamiltonian::constant(nq, 1.0);
        for bit in 0..self.clock_bits {
            let value = code >> (self.clock_bits - 1 - bit) & 1;
            acc = acc.mul(&bit_projector(nq, self.clock_qubit(bit), value)).expect("commuting factors");
        }
        acc
    }

    /// `(|t><t-1| + |t-1><t|) / 2`: half an X on the bit that flips, times
    /// projectors on the shared bits.
    pub fn clock_transition(&self, t: usize) -> PauliHamiltonian {
        assert!(t >= 1, "transition needs t >= 1");
        let (now, before) = (gray(t), gray(t - 1));
        let diff = now ^ before;
        let nq = self.num_qubits();
        let mut acc = PauliHamiltonian::constant(nq, 1.0);
        for bit in 0..self.clock_bits {
            let mask = 1 << (self.clock_bits - 1 - bit);
            let q = self.clock_qubit(bit);
            let factor = if diff & mask != 0 {
                PauliHamiltonian::monomial(nq, 0.5, &[(q, Pauli::X)]).expect("in range")
            } else {
                bit_projector(nq, q, usize::from(now & mask != 0))
            };
            acc = acc.mul(&factor).expect("commuting factors");
        }
        acc
    }
}

/// `|v><v|` on qubit `q`: `(1 + Z)/2` for `v = 0`, `(1 - Z)/2` for `v = 1`.
fn bit_projector(nq: usize, q: usize, value: usize) -> PauliHamiltonian {
    let s = if value == 0 { 0.5 } else { -0.5 };
    PauliHamiltonian::constant(nq, 0.5).add(&PauliHamiltonian::monomial(nq, s, &[(q, Pauli::Z)]).expect("in range"))
}

/// The three positive semidefinite pieces of a clock Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianParts {
    pub h_out: PauliHamiltonian,
    pub h_in: PauliHamiltonian,
    pub h_prop: PauliHamiltonian,
}

impl HamiltonianParts {
    /// `H_out + J_in H_in + J_prop H_prop`.
    pub fn combine(&self, j_in: f64, j_prop: f64) -> PauliHamiltonian {
        self.h_out.add(&self.h_in.scale(j_in)).add(&self.h_prop.scale(j_prop))
    }
}

/// Builds `H_out`, `H_in`, `H_prop` for an arbitrary `{U(alpha), CNOT}` circuit.
/// `H_out` penalizes output 1 on the first system qubit for `P0` and output 0 for `P1`.
pub fn build_general_parts(circuit: &ClockCircuit, variant: Variant) -> Result<HamiltonianParts, HamiltonianError> {
    let nq = circuit.num_qubits();
    if nq > MAX_QUBITS {
        return Err(HamiltonianError::TooLarge(nq));
    }
    let n = circuit.n;
    let steps = circuit.steps();
    let sys_positions: Vec<usize> = (0..n).collect();

    let c0 = circuit.clock_projector(0);
    let mut h_in = PauliHamiltonian::zero(nq);
    for i in 0..n {
        h_in = h_in.add(&bit_projector(nq, i, 1).mul(&c0)?);
    }

    let bad_output = match variant {
        Variant::P0 => 1,
        Variant::P1 => 0,
    };
    let h_out = bit_projector(nq, 0, bad_output)
        .mul(&circuit.clock_projector(steps))?
        .scale((steps + 1) as f64);

    let mut h_prop = PauliHamiltonian::zero(nq);
    for (idx, g) in circuit.gates.iter().enumerate() {
        let t = idx + 1;
        let u = g.operator(n)?.embed(nq, &sys_positions);
        let hop = u.mul(&circuit.clock_transition(t))?;
        h_prop = h_prop
            .add(&circuit.clock_projector(t).scale(0.5))
            .add(&circuit.clock_projector(t - 1).scale(0.5))
            .add(&hop.scale(-1.0));
    }
    Ok(HamiltonianParts { h_out, h_in, h_prop })
}

/// `H = H_out + J_in H_in + J_prop H_prop` for variant `P0`.
pub fn build_general_h(circuit: &ClockCircuit, j_in: f64, j_prop: f64) -> Result<PauliHamiltonian, HamiltonianError> {
    Ok(build_general_parts(circuit, Variant::P0)?.combine(j_in, j_prop))
}

/// The two-qubit pieces written out term by term.
pub fn fixed_parts(problem: &DecisionProblem) -> HamiltonianParts {
    let (s, c) = problem.alpha.sin_cos();
    let h = |terms: &[(f64, &str)]| {
        PauliHamiltonian::from_terms(2, terms.iter().map(|&(c, p)| (c, p.parse().expect("literal"))))
            .expect("literal terms")
    };
    let h_out = match problem.variant {
        Variant::P0 => h(&[(0.5, "II"), (-0.5, "ZI"), (-0.5, "IZ"), (0.5, "ZZ")]),
        Variant::P1 => h(&[(0.5, "II"), (0.5, "ZI"), (-0.5, "IZ"), (-0.5, "ZZ")]),
    };
    let h_in = h(&[(0.25, "II"), (-0.25, "ZI"), (0.25, "IZ"), (-0.25, "ZZ")]);
    let h_prop = h(&[(0.5, "II"), (-0.5 * c, "ZX"), (-0.5 * s, "XX")]);
    HamiltonianParts { h_out, h_in, h_prop }
}

/// `H = H_out + 6 H_in + 3 H_prop` on (system, clock).
pub fn build_fixed_h(problem: &DecisionProblem) -> PauliHamiltonian {
    fixed_parts(problem).combine(DEFAULT_J_IN, DEFAULT_J_PROP)
}

/// History state `sum_t U_t ... U_1 |0^n> (x) |gray(t)> / sqrt(T + 1)`.
pub fn clock_state(circuit: &ClockCircuit) -> Result<QuantumState, HamiltonianError> {
    let nq = circuit.num_qubits();
    if nq > MAX_QUBITS {
        return Err(HamiltonianError::TooLarge(nq));
    }
    let n = circuit.n;
    let bits = circuit.clock_bits;
    let norm = 1.0 / ((circuit.steps() + 1) as f64).sqrt();
    let mut out = vec![C64::new(0.0, 0.0); 1 << nq];
    let mut sys = QuantumState::zero(n)?;
    for t in 0..=circuit.steps() {
        if t > 0 {
            sys.apply_gate(&circuit.gates[t - 1].as_gate())?;
        }
        let amps = sys.amplitudes().expect("gates keep the state pure");
        for (i, a) in amps.iter().enumerate() {
            out[(i << bits) | gray(t)] += a * norm;
        }
    }
    Ok(QuantumState::from_amplitudes(out)?)
}

/// `|eta(alpha)> = (|00> + cos(alpha)|01> + sin(alpha)|11>) / sqrt(2)`.
pub fn eta_state(alpha: f64) -> QuantumState {
    let (s, c) = alpha.sin_cos();
    let r = FRAC_1_SQRT_2;
    QuantumState::from_amplitudes(vec![
        C64::new(r, 0.0),
        C64::new(c * r, 0.0),
        C64::new(0.0, 0.0),
        C64::new(s * r, 0.0),
    ])
    .expect("normalized")
    .with_labels(["eta1", "eta2"])
}
