use serde::{Deserialize, Serialize};

use super::brick::{brick_gate, BRICK_PARAMS};
use super::template::{CircuitTemplate, LayerSpec, ParamKind, Slot};
use crate::error::{Error, Result};
use crate::statevec::Observable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableKind {
    /// Z on qubit 0.
    LocalZ1,
    /// Z on every qubit.
    GlobalZAll,
    Custom { observable: Observable },
}

/// 1-D nearest-neighbour brickwork.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeaConfig {
    pub n_qubits: usize,
    pub depth: usize,
    pub observable: ObservableKind,
}

/// Pairs (q, q + 1) of layer `layer`: even layers start at qubit 0, odd
/// layers at qubit 1.
pub fn brick_pairs(n_qubits: usize, layer: usize) -> Vec<(usize, usize)> {
    (layer % 2..n_qubits.saturating_sub(1))
        .step_by(2)
        .map(|q| (q, q + 1))
        .collect()
}

impl HeaConfig {
    pub fn new(n_qubits: usize, depth: usize, observable: ObservableKind) -> Self {
        HeaConfig {
            n_qubits,
            depth,
            observable,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::Validation("brickwork needs at least 2 qubits".into()));
        }
        if self.depth == 0 {
            return Err(Error::Validation("depth must be at least 1".into()));
        }
        Ok(())
    }

    pub fn observable(&self) -> Observable {
        match &self.observable {
            ObservableKind::LocalZ1 => Observable::z(0, self.n_qubits),
            ObservableKind::GlobalZAll => Observable::z_all(self.n_qubits),
            ObservableKind::Custom { observable } => observable.clone(),
        }
    }

    pub fn brick_count(&self) -> usize {
        (0..self.depth)
            .map(|l| brick_pairs(self.n_qubits, l).len())
            .sum()
    }

    /// 15 angles per brick, summed over all layers.
    pub fn param_count(&self) -> usize {
        self.brick_count() * BRICK_PARAMS
    }
}

/// The parametrized family: every brick reads its own 15 angles.
pub fn hea_family(cfg: &HeaConfig) -> Result<CircuitTemplate> {
    cfg.validate()?;
    let mut index = 0;
    let layers = (0..cfg.depth)
        .map(|l| LayerSpec {
            slots: brick_pairs(cfg.n_qubits, l)
                .into_iter()
                .map(|(a, b)| {
                    let slot = Slot::Param {
                        kind: ParamKind::Brick,
                        index,
                        qubits: vec![a, b],
                    };
                    index += BRICK_PARAMS;
                    slot
                })
                .collect(),
        })
        .collect();
    CircuitTemplate::new(cfg.n_qubits, layers, cfg.observable())
}

/// The brickwork instantiated at `theta` (bricks become fixed gates).
pub fn build_hea(cfg: &HeaConfig, theta: &[f64]) -> Result<CircuitTemplate> {
    cfg.validate()?;
    if theta.len() != cfg.param_count() {
        return Err(Error::Shape(format!(
            "{} angles for {} bricks × 15",
            theta.len(),
            cfg.brick_count()
        )));
    }
    let mut chunks = theta.chunks(BRICK_PARAMS);
    let layers = (0..cfg.depth)
        .map(|l| LayerSpec {
            slots: brick_pairs(cfg.n_qubits, l)
                .into_iter()
                .map(|(a, b)| Slot::Fixed {
                    gate: brick_gate(chunks.next().expect("length checked"), a, b),
                })
                .collect(),
        })
        .collect();
    CircuitTemplate::new(cfg.n_qubits, layers, cfg.observable())
}
