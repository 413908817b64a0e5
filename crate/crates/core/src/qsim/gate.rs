use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use super::SimError;

/// Gates understood by the simulator.
///
/// Rotations follow `R^sigma(theta) = exp(-i theta sigma / 2)` and the
/// Molmer-Sorensen gate is `MS(theta) = exp(-i theta X_a X_b / 2)`.
/// `U` is the self-adjoint single-qubit gate `cos(alpha) Z + sin(alpha) X`
/// and `Cu` its controlled version.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, theta: f64 },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    H { qubit: usize },
    X { qubit: usize },
    Z { qubit: usize },
    U { qubit: usize, alpha: f64 },
    Cnot { control: usize, target: usize },
    Cphase { a: usize, b: usize },
    Cu { control: usize, target: usize, alpha: f64 },
    Ms { a: usize, b: usize, theta: f64 },
}

/// Dense unitary of a gate in its local qubit order (see [`Gate::qubits`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    One([C64; 4]),
    Two([C64; 16]),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Gate {
    /// Qubits acted on, in the order used by [`Gate::matrix`].
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::X { qubit }
            | Gate::Z { qubit }
            | Gate::U { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } | Gate::Cu { control, target, .. } => {
                vec![control, target]
            }
            Gate::Cphase { a, b } | Gate::Ms { a, b, .. } => vec![a, b],
        }
    }

    pub fn is_single_qubit(&self) -> bool {
        self.qubits().len() == 1
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::H { .. } => "H",
            Gate::X { .. } => "X",
            Gate::Z { .. } => "Z",
            Gate::U { .. } => "U",
            Gate::Cnot { .. } => "CNOT",
            Gate::Cphase { .. } => "CPHASE",
            Gate::Cu { .. } => "CU",
            Gate::Ms { .. } => "MS",
        }
    }

    /// Checks target range and distinctness.
    pub fn validate(&self, num_qubits: usize) -> Result<(), SimError> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(SimError::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(SimError::DuplicateTarget(qs[0]));
        }
        Ok(())
    }

    pub fn matrix(&self) -> GateMatrix {
        match *self {
            Gate::Rx { theta, .. } => GateMatrix::One(rotation_x(theta)),
            Gate::Ry { theta, .. } => GateMatrix::One(rotation_y(theta)),
            Gate::Rz { theta, .. } => GateMatrix::One(rotation_z(theta)),
            Gate::H { .. } => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                GateMatrix::One([h, h, h, -h])
            }
            Gate::X { .. } => GateMatrix::One([ZERO, ONE, ONE, ZERO]),
            Gate::Z { .. } => GateMatrix::One([ONE, ZERO, ZERO, -ONE]),
            Gate::U { alpha, .. } => GateMatrix::One(u_alpha(alpha)),
            Gate::Cnot { .. } => GateMatrix::Two(controlled([ZERO, ONE, ONE, ZERO])),
            Gate::Cphase { .. } => GateMatrix::Two(controlled([ONE, ZERO, ZERO, -ONE])),
            Gate::Cu { alpha, .. } => GateMatrix::Two(controlled(u_alpha(alpha))),
            Gate::Ms { theta, .. } => {
                let c = C64::new((theta / 2.0).cos(), 0.0);
                let s = C64::new(0.0, -(theta / 2.0).sin());
                let mut m = [ZERO; 16];
                for i in 0..4 {
                    m[i * 4 + i] = c;
                    m[i * 4 + (3 - i)] = s;
                }
                GateMatrix::Two(m)
            }
        }
    }

    /// Same gate with qubit indices passed through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::Rx { qubit, theta } => Gate::Rx { qubit: f(qubit), theta },
            Gate::Ry { qubit, theta } => Gate::Ry { qubit: f(qubit), theta },
            Gate::Rz { qubit, theta } => Gate::Rz { qubit: f(qubit), theta },
            Gate::H { qubit } => Gate::H { qubit: f(qubit) },
            Gate::X { qubit } => Gate::X { qubit: f(qubit) },
            Gate::Z { qubit } => Gate::Z { qubit: f(qubit) },
            Gate::U { qubit, alpha } => Gate::U { qubit: f(qubit), alpha },
            Gate::Cnot { control, target } => Gate::Cnot { control: f(control), target: f(target) },
            Gate::Cphase { a, b } => Gate::Cphase { a: f(a), b: f(b) },
            Gate::Cu { control, target, alpha } => {
                Gate::Cu { control: f(control), target: f(target), alpha }
            }
            Gate::Ms { a, b, theta } => Gate::Ms { a: f(a), b: f(b), theta },
        }
    }
}

pub(crate) fn rotation_x(theta: f64) -> [C64; 4] {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    [c, s, s, c]
}

pub(crate) fn rotation_y(theta: f64) -> [C64; 4] {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new((theta / 2.0).sin(), 0.0);
    [c, -s, s, c]
}

pub(crate) fn rotation_z(theta: f64) -> [C64; 4] {
    [C64::from_polar(1.0, -theta / 2.0), ZERO, ZERO, C64::from_polar(1.0, theta / 2.0)]
}

fn u_alpha(alpha: f64) -> [C64; 4] {
    let (s, c) = alpha.sin_cos();
    [C64::new(c, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-c, 0.0)]
}

/// `|0><0| (x) 1 + |1><1| (x) u` with the control as the first local qubit.
fn controlled(u: [C64; 4]) -> [C64; 16] {
    let mut m = [ZERO; 16];
    m[0] = ONE;
    m[5] = ONE;
    m[2 * 4 + 2] = u[0];
    m[2 * 4 + 3] = u[1];
    m[3 * 4 + 2] = u[2];
    m[3 * 4 + 3] = u[3];
    m
}
