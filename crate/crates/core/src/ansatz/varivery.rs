use serde::{Deserialize, Serialize};

use super::template::{CircuitTemplate, DataGate, LayerSpec, ParamKind, Slot};
use super::tilde::MAX_COUNTER_QUBITS;
use crate::error::{Error, Result};
use crate::hardfn::PlantedFunction;
use crate::statevec::{Observable, MAX_QUBITS};

/// Layered model ∏_j Ũ(x) ⊗ RX(θ_j) measured with Z(data 0) ⊗ Z(trainable).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariVeryConfig {
    pub hard_fn: PlantedFunction,
    /// Counter register size.
    pub t: usize,
    /// Layer count L.
    pub layers: usize,
    /// Data register size n.
    pub n_data: usize,
}

impl VariVeryConfig {
    pub fn new(hard_fn: PlantedFunction, t: usize, layers: usize) -> Self {
        let n_data = hard_fn.n_bits();
        VariVeryConfig {
            hard_fn,
            t,
            layers,
            n_data,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data + self.t + 1
    }

    pub fn trainable_qubit(&self) -> usize {
        self.n_data + self.t
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_data != self.hard_fn.n_bits() {
            return Err(Error::Validation(format!(
                "{} data qubits for a {}-bit planted function",
                self.n_data,
                self.hard_fn.n_bits()
            )));
        }
        if self.t == 0 || self.t > MAX_COUNTER_QUBITS {
            return Err(Error::Validation(format!("counter size t = {}", self.t)));
        }
        if self.layers == 0 || self.layers >= 1usize << self.t {
            return Err(Error::Validation(format!(
                "L = {} outside 1..2^{}",
                self.layers, self.t
            )));
        }
        if self.n_qubits() > MAX_QUBITS {
            return Err(Error::Validation(format!(
                "{} qubits exceed the simulator cap",
                self.n_qubits()
            )));
        }
        Ok(())
    }

    /// The observable of every template this config can produce, whatever L.
    pub fn observable(&self) -> Observable {
        let word = Observable::word_with(
            self.n_qubits(),
            &[(0, 'Z'), (self.trainable_qubit(), 'Z')],
        );
        Observable::pauli_word(1.0, &word)
    }
}

pub fn build_varivery(cfg: &VariVeryConfig) -> Result<CircuitTemplate> {
    cfg.validate()?;
    let n = cfg.n_data;
    let gadget = DataGate::TildeU {
        function: cfg.hard_fn.clone(),
        data: (0..n).collect(),
        counter: (n..n + cfg.t).collect(),
    };
    let layers = (0..cfg.layers)
        .map(|j| LayerSpec {
            slots: vec![
                Slot::Data {
                    gate: gadget.clone(),
                },
                Slot::Param {
                    kind: ParamKind::RotationX,
                    index: j,
                    qubits: vec![cfg.trainable_qubit()],
                },
            ],
        })
        .collect();
    CircuitTemplate::new(cfg.n_qubits(), layers, cfg.observable())
}
