//! Dense state-vector simulator: pure states, gates, controlled blocks and
//! observables.

mod gate;
pub mod matrix;
mod observable;
mod state;

pub use gate::{circuit_matrix, inverse_circuit, GateOp, UNITARY_TOL};
pub use matrix::{CMatrix, C64};
pub use observable::{expectation, Observable, PauliTerm, MAX_DENSE_QUBITS};
pub use state::{apply, overlap, tensor, zero_state, StateVector, MAX_QUBITS, NORM_TOL};
