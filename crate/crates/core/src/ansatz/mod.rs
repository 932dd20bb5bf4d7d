//! Circuit families: the 15-angle two-qubit brick, 1-D brickwork (HEA),
//! the adder gadget Ũ(x), the layered vari-veryational model, and the
//! structural property validator.

mod brick;
mod hea;
mod template;
mod tilde;
mod validate;
mod varivery;

pub use brick::{
    brick_gate, brick_matrix, euler_zyz, identity_angles, interaction, phase_distance,
    BRICK_PARAMS,
};
pub use hea::{brick_pairs, build_hea, hea_family, HeaConfig, ObservableKind};
pub use template::{Appearance, CircuitTemplate, DataGate, LayerSpec, ParamKind, Shift, Slot};
pub use tilde::{adder_gate, build_tilde_u, telescoping_overlap, tilde_u_gates, MAX_COUNTER_QUBITS};
pub use validate::{validate_varivery, ConstructionMeta, PropertyReport, TrainabilityEvidence};
pub use varivery::{build_varivery, VariVeryConfig};
