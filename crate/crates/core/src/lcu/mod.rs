//! Kernel models as ancilla-controlled circuits, and compilation of
//! circuits into 1-D brickwork of parametrized two-qubit bricks.

mod brickwork;
mod circuit;
mod kak;
mod prop1;
mod synthesis;

pub use brickwork::{
    compile_brickwork, compile_family, compile_segments, BrickSlot, BrickworkFamily, BrickworkLayout,
    Role, Segment,
};
pub use circuit::{compile_lcu, LcuCircuit};
pub use kak::{brick_angles, zyz_angles, KAK_TOL};
pub use prop1::{run_prop1_experiment, Prop1Artifacts, Prop1Config, Prop1Record};
pub use synthesis::{
    expand_gate, multi_controlled, prepare_state, preparation_ucrs, two_qubit_gates, unitary_sqrt,
    Axis, Ucr, MAX_DECOMPOSED_ADDER,
};
