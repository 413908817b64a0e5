//! Classical verification of a delegated quantum computation, simulated end to end.
//!
//! A classical verifier asks an (untrusted, simulated) quantum prover to
//! certify the answer to a one-gate decision problem `C = U(alpha)`. The
//! verifier turns the claim into a clock Hamiltonian whose ground energy
//! separates "yes" from "no", then delegates the Z/X measurements needed to
//! estimate the energy of the prover's history state through a pair of toy
//! trapdoor functions. The prover commits to part of its measurement record
//! before learning whether the round is a test round (consistency check) or a
//! measurement round (energy sample).
//!
//! Module map:
//!
//! * [`qsim`] - dense statevector / density-operator simulator (<= 10 qubits).
//! * [`pauli`] - Pauli strings and their algebra.
//! * [`hamiltonian`] - clock Hamiltonians, clock states, spectra, decision problems.
//! * [`trapdoor`] - the one-to-one / two-to-one function family on 2-bit strings.
//! * [`protocol`] - verifier and prover state machines, wire messages, estimators.
//! * [`noise`] - global depolarizing model, noisy energy curves, rate fitting.
//! * [`compile`] - lowering to the trapped-ion gate set and fidelity budgets.
//! * [`directest`] - energy estimation directly on the two-qubit clock state.
//! * [`rng`] - seeded, splittable random streams.
//! * [`curve`] - the CSV schema shared by all energy curves.

pub mod compile;
pub mod curve;
pub mod directest;
pub mod hamiltonian;
pub mod noise;
pub mod pauli;
pub mod protocol;
pub mod qsim;
pub mod rng;
pub mod trapdoor;

pub use hamiltonian::{DecisionProblem, PauliHamiltonian, Variant};
pub use qsim::{Basis, Gate, KrausChannel, QuantumState};
