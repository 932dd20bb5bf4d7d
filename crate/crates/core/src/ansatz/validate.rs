use serde::{Deserialize, Serialize};

use super::template::{CircuitTemplate, LayerSpec, Slot};
use super::varivery::VariVeryConfig;
use crate::statevec::Observable;
use crate::train::TrainTrace;

/// What a builder records about the template it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionMeta {
    pub builder: String,
    /// Layer count the builder was asked for.
    pub layer_count: usize,
    /// Whether the builder accepts any layer count in its validity window.
    pub tunable_layers: bool,
    pub starts_from_zero: bool,
    /// Observable the builder produces for a single layer.
    pub reference_observable: Observable,
}

impl ConstructionMeta {
    pub fn varivery(cfg: &VariVeryConfig) -> Self {
        let mut one = cfg.clone();
        one.layers = 1;
        ConstructionMeta {
            builder: "varivery".into(),
            layer_count: cfg.layers,
            tunable_layers: true,
            starts_from_zero: true,
            reference_observable: one.observable(),
        }
    }

    pub fn hea(cfg: &super::hea::HeaConfig) -> Self {
        ConstructionMeta {
            builder: "hea".into(),
            layer_count: cfg.depth,
            tunable_layers: true,
            starts_from_zero: true,
            reference_observable: cfg.observable(),
        }
    }
}

/// Status of the behavioural property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrainabilityEvidence {
    /// Deferred to training evidence.
    Pending,
    Demonstrated { final_risk: f64, threshold: f64 },
    NotDemonstrated { final_risk: f64, threshold: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub single_repeated_layer: bool,
    pub tunable_layer_count: bool,
    pub zero_initial_state: bool,
    pub layer_independent_observable: bool,
    pub gradient_trainable: TrainabilityEvidence,
}

impl PropertyReport {
    pub fn structural_ok(&self) -> bool {
        self.single_repeated_layer
            && self.tunable_layer_count
            && self.zero_initial_state
            && self.layer_independent_observable
    }

    /// Fills the trainability slot from a finished run.
    pub fn attach_trace(&mut self, trace: &TrainTrace, threshold: f64) {
        let final_risk = trace.final_risk();
        self.gradient_trainable = if final_risk <= threshold {
            TrainabilityEvidence::Demonstrated {
                final_risk,
                threshold,
            }
        } else {
            TrainabilityEvidence::NotDemonstrated {
                final_risk,
                threshold,
            }
        };
    }
}

/// Layer with parameter indices rebased to the layer's smallest index.
fn normalized(layer: &LayerSpec) -> LayerSpec {
    let base = layer
        .slots
        .iter()
        .filter_map(|s| match s {
            Slot::Param { index, .. } => Some(*index),
            _ => None,
        })
        .min()
        .unwrap_or(0);
    LayerSpec {
        slots: layer
            .slots
            .iter()
            .map(|s| match s {
                Slot::Param { kind, index, qubits } => Slot::Param {
                    kind: *kind,
                    index: index - base,
                    qubits: qubits.clone(),
                },
                other => other.clone(),
            })
            .collect(),
    }
}

/// Structural check of the four static properties of a layered model.
pub fn validate_varivery(template: &CircuitTemplate, meta: &ConstructionMeta) -> PropertyReport {
    let layers = template.layers();
    let single_repeated_layer = !layers.is_empty() && {
        let first = normalized(&layers[0]);
        layers[1..].iter().all(|l| normalized(l) == first)
    };
    PropertyReport {
        single_repeated_layer,
        tunable_layer_count: meta.tunable_layers && layers.len() == meta.layer_count,
        zero_initial_state: meta.starts_from_zero,
        layer_independent_observable: *template.observable() == meta.reference_observable,
        gradient_trainable: TrainabilityEvidence::Pending,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_hea, build_varivery, HeaConfig, ObservableKind};
    use crate::hardfn::parity_fn;

    #[test]
    fn varivery_passes_structural_checks() {
        let cfg = VariVeryConfig::new(parity_fn(2).unwrap(), 3, 5);
        let t = build_varivery(&cfg).unwrap();
        let r = validate_varivery(&t, &ConstructionMeta::varivery(&cfg));
        assert!(r.structural_ok());
        assert_eq!(r.gradient_trainable, TrainabilityEvidence::Pending);
    }

    #[test]
    fn hea_with_varying_bricks_is_not_a_repeated_layer() {
        let cfg = HeaConfig::new(3, 3, ObservableKind::LocalZ1);
        let theta: Vec<f64> = (0..cfg.param_count()).map(|k| 0.1 * k as f64).collect();
        let t = build_hea(&cfg, &theta).unwrap();
        let r = validate_varivery(&t, &ConstructionMeta::hea(&cfg));
        assert!(!r.single_repeated_layer);
    }

    #[test]
    fn layer_dependent_observable_is_flagged() {
        let cfg = VariVeryConfig::new(parity_fn(2).unwrap(), 3, 4);
        let t = build_varivery(&cfg).unwrap();
        // Observable moved to the counter qubit indexed by L.
        let word = crate::statevec::Observable::word_with(t.n_qubits(), &[(cfg.layers % t.n_qubits(), 'Z')]);
        let moved = CircuitTemplate::new(
            t.n_qubits(),
            t.layers().to_vec(),
            crate::statevec::Observable::pauli_word(1.0, &word),
        )
        .unwrap();
        let r = validate_varivery(&moved, &ConstructionMeta::varivery(&cfg));
        assert!(!r.layer_independent_observable);
        assert!(r.single_repeated_layer);
    }
}
