//! Dense statevector and density-operator simulator.
//!
//! # Bit ordering
//!
//! Qubit 0 is the most significant bit of a basis-state index. For `n`
//! qubits, qubit `q` corresponds to the bit `1 << (n - 1 - q)`; the basis
//! state `|b_0 b_1 ... b_{n-1}>` has index `sum_q b_q 2^(n-1-q)`. The same
//! convention is used for Pauli strings, gate matrices (first listed qubit is
//! the high bit of the local index) and measurement outcomes (first target is
//! the high bit of the outcome index). Nothing else in the crate redefines it.
//!
//! Density operators are stored row-major as `2^n * 2^n` complex vectors.
//! Internally a density operator is treated as a `2n`-qubit vector whose first
//! `n` positions index rows and last `n` index columns, so `U rho U^dagger` is
//! `U` on position `q` followed by `conj(U)` on position `n + q`.

mod channel;
mod gate;
mod measure;
mod state;

pub use channel::{depolarizing_kraus, KrausChannel};
pub use gate::{Gate, GateMatrix};
pub use measure::Basis;
pub use state::{QuantumState, Representation};

pub(crate) use gate::{rotation_x, rotation_y, rotation_z};
pub use measure::sample_index;

use thiserror::Error;

/// Largest supported register.
pub const MAX_QUBITS: usize = 10;

/// Numerical tolerance for the state invariants.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit {qubit} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} listed more than once")]
    DuplicateTarget(usize),
    #[error("{0} qubits requested; supported range is 1..={MAX_QUBITS}")]
    UnsupportedSize(usize),
    #[error("buffer of length {len} is not a valid {what}")]
    BadDimension { len: usize, what: &'static str },
    #[error("state is not normalized (norm or trace = {0})")]
    NotNormalized(f64),
    #[error("density operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("density operator has eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),
    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("Pauli string has length {got}, state has {expected} qubits")]
    PauliLength { expected: usize, got: usize },
    #[error("negative probability {0:.3e}")]
    NegativeProbability(f64),
    #[error("measurement branch has zero probability")]
    ZeroProbability,
}

pub(crate) fn check_targets(targets: &[usize], num_qubits: usize) -> Result<(), SimError> {
    for (i, &q) in targets.iter().enumerate() {
        if q >= num_qubits {
            return Err(SimError::QubitOutOfRange { qubit: q, num_qubits });
        }
        if targets[..i].contains(&q) {
            return Err(SimError::DuplicateTarget(q));
        }
    }
    Ok(())
}
