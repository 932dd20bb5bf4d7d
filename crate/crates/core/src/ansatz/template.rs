use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::brick::{brick_gate, BRICK_PARAMS};
use super::tilde::tilde_u_gates;
use crate::error::{Error, Result};
use crate::hardfn::PlantedFunction;
use crate::statevec::{GateOp, Observable, StateVector, MAX_QUBITS};

/// Kind of a parametrized slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    RotationX,
    RotationY,
    RotationZ,
    /// 15-angle two-qubit brick reading parameters `index..index + 15`.
    Brick,
}

impl ParamKind {
    pub fn width(self) -> usize {
        match self {
            ParamKind::Brick => BRICK_PARAMS,
            _ => 1,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            ParamKind::Brick => 2,
            _ => 1,
        }
    }

    /// Pauli rotations admit the two-term shift rule.
    pub fn is_pauli_rotation(self) -> bool {
        !matches!(self, ParamKind::Brick)
    }
}

/// Data-dependent block of a layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum DataGate {
    /// U(x) of a planted function on `qubits` (local qubit i ↦ `qubits[i]`).
    Planted {
        function: PlantedFunction,
        qubits: Vec<usize>,
    },
    /// Ũ(x): U(x) controlled on the counter reading zero, then counter += 1.
    TildeU {
        function: PlantedFunction,
        data: Vec<usize>,
        counter: Vec<usize>,
    },
    /// Explicit per-input gate lists on absolute qubit indices.
    Lookup {
        qubits: Vec<usize>,
        table: Vec<(u64, Vec<GateOp>)>,
    },
}

impl DataGate {
    pub fn gates(&self, x: u64) -> Result<Vec<GateOp>> {
        match self {
            DataGate::Planted { function, qubits } => {
                Ok(function.circuit(x)?.iter().map(|g| g.relabel(qubits)).collect())
            }
            DataGate::TildeU {
                function,
                data,
                counter,
            } => {
                let u: Vec<GateOp> = function.circuit(x)?.iter().map(|g| g.relabel(data)).collect();
                Ok(tilde_u_gates(&u, counter))
            }
            DataGate::Lookup { table, .. } => table
                .iter()
                .find(|(key, _)| *key == x)
                .map(|(_, g)| g.clone())
                .ok_or_else(|| Error::Domain(format!("no data gates recorded for input {x}"))),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            DataGate::Planted { qubits, .. } | DataGate::Lookup { qubits, .. } => qubits.clone(),
            DataGate::TildeU { data, counter, .. } => {
                data.iter().chain(counter.iter()).copied().collect()
            }
        }
    }

    pub fn in_domain(&self, x: u64) -> bool {
        match self {
            DataGate::Planted { function, .. } | DataGate::TildeU { function, .. } => {
                function.in_domain(x)
            }
            DataGate::Lookup { table, .. } => table.iter().any(|(k, _)| *k == x),
        }
    }
}

/// One entry of a layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "slot", rename_all = "snake_case")]
pub enum Slot {
    Data { gate: DataGate },
    Param { kind: ParamKind, index: usize, qubits: Vec<usize> },
    Fixed { gate: GateOp },
}

impl Slot {
    pub fn support(&self) -> Vec<usize> {
        match self {
            Slot::Data { gate } => gate.support(),
            Slot::Param { qubits, .. } => qubits.clone(),
            Slot::Fixed { gate } => gate.support(),
        }
    }
}

/// A column of slots with pairwise disjoint supports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub slots: Vec<Slot>,
}

/// One occurrence of a parametrized slot, in circuit order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Appearance {
    pub layer: usize,
    pub slot: usize,
    pub kind: ParamKind,
    pub index: usize,
}

/// Angle added to one appearance during evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shift {
    pub appearance: usize,
    pub offset: usize,
    pub delta: f64,
}

/// A layered circuit family (x, θ) ↦ circuit with a fixed observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTemplate")]
pub struct CircuitTemplate {
    n_qubits: usize,
    layers: Vec<LayerSpec>,
    observable: Observable,
    param_count: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    n_qubits: usize,
    layers: Vec<LayerSpec>,
    observable: Observable,
    param_count: usize,
}

impl TryFrom<RawTemplate> for CircuitTemplate {
    type Error = Error;

    fn try_from(raw: RawTemplate) -> Result<Self> {
        let t = CircuitTemplate::new(raw.n_qubits, raw.layers, raw.observable)?;
        if t.param_count != raw.param_count {
            return Err(Error::Validation(format!(
                "declared param_count {} but slots cover {}",
                raw.param_count, t.param_count
            )));
        }
        Ok(t)
    }
}

impl CircuitTemplate {
    pub fn new(n_qubits: usize, layers: Vec<LayerSpec>, observable: Observable) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!("{n_qubits} qubits")));
        }
        observable.validate(n_qubits)?;
        let mut covered = BTreeSet::new();
        for (l, layer) in layers.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for slot in &layer.slots {
                for q in slot.support() {
                    if q >= n_qubits {
                        return Err(Error::Index(format!(
                            "layer {l} touches qubit {q} of {n_qubits}"
                        )));
                    }
                    if !seen.insert(q) {
                        return Err(Error::Validation(format!(
                            "layer {l} uses qubit {q} twice"
                        )));
                    }
                }
                match slot {
                    Slot::Param { kind, index, qubits } => {
                        if qubits.len() != kind.arity() {
                            return Err(Error::Validation(format!(
                                "{kind:?} slot on {} qubits",
                                qubits.len()
                            )));
                        }
                        covered.extend(*index..index + kind.width());
                    }
                    Slot::Fixed { gate } => gate.validate(n_qubits)?,
                    Slot::Data { .. } => {}
                }
            }
        }
        let param_count = covered.len();
        if covered.iter().next_back().is_some_and(|&m| m + 1 != param_count) {
            return Err(Error::Validation(
                "parameter indices must cover 0..param_count without gaps".into(),
            ));
        }
        Ok(CircuitTemplate {
            n_qubits,
            layers,
            observable,
            param_count,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn has_data(&self) -> bool {
        self.data_gates().next().is_some()
    }

    fn data_gates(&self) -> impl Iterator<Item = &DataGate> {
        self.layers.iter().flat_map(|l| &l.slots).filter_map(|s| match s {
            Slot::Data { gate } => Some(gate),
            _ => None,
        })
    }

    /// True when every data block accepts `x`.
    pub fn accepts(&self, x: u64) -> bool {
        self.data_gates().all(|g| g.in_domain(x))
    }

    /// Parametrized slots in circuit order.
    pub fn appearances(&self) -> Vec<Appearance> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for (s, slot) in layer.slots.iter().enumerate() {
                if let Slot::Param { kind, index, .. } = slot {
                    out.push(Appearance {
                        layer: l,
                        slot: s,
                        kind: *kind,
                        index: *index,
                    });
                }
            }
        }
        out
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count {
            return Err(Error::Shape(format!(
                "{} parameters for a template with {}",
                theta.len(),
                self.param_count
            )));
        }
        Ok(())
    }

    /// Concrete gate list at (x, θ), optionally with one appearance shifted.
    pub fn gates(&self, x: u64, theta: &[f64], shift: Option<Shift>) -> Result<Vec<GateOp>> {
        self.check_theta(theta)?;
        let mut out = Vec::new();
        let mut appearance = 0usize;
        let mut brick = [0.0; BRICK_PARAMS];
        for layer in &self.layers {
            for slot in &layer.slots {
                match slot {
                    Slot::Data { gate } => out.extend(gate.gates(x)?),
                    Slot::Fixed { gate } => out.push(gate.clone()),
                    Slot::Param { kind, index, qubits } => {
                        let delta = |offset: usize| match shift {
                            Some(s) if s.appearance == appearance && s.offset == offset => s.delta,
                            _ => 0.0,
                        };
                        let angle = theta[*index] + delta(0);
                        let target = qubits[0];
                        out.push(match kind {
                            ParamKind::RotationX => GateOp::RotationX { angle, target },
                            ParamKind::RotationY => GateOp::RotationY { angle, target },
                            ParamKind::RotationZ => GateOp::RotationZ { angle, target },
                            ParamKind::Brick => {
                                for (k, b) in brick.iter_mut().enumerate() {
                                    *b = theta[index + k] + delta(k);
                                }
                                brick_gate(&brick, qubits[0], qubits[1])
                            }
                        });
                        appearance += 1;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Output state from |0…0⟩.
    pub fn state(&self, x: u64, theta: &[f64], shift: Option<Shift>) -> Result<StateVector> {
        let mut s = StateVector::zero_state(self.n_qubits)?;
        s.apply_all(&self.gates(x, theta, shift)?)?;
        Ok(s)
    }

    /// f(x; θ) = ⟨ψ(x; θ)|M|ψ(x; θ)⟩.
    pub fn evaluate(&self, x: u64, theta: &[f64]) -> Result<f64> {
        self.evaluate_shifted(x, theta, None)
    }

    pub fn evaluate_shifted(&self, x: u64, theta: &[f64], shift: Option<Shift>) -> Result<f64> {
        self.observable.expectation(&self.state(x, theta, shift)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_qubit_rx() -> CircuitTemplate {
        CircuitTemplate::new(
            1,
            vec![LayerSpec {
                slots: vec![Slot::Param {
                    kind: ParamKind::RotationX,
                    index: 0,
                    qubits: vec![0],
                }],
            }],
            Observable::z(0, 1),
        )
        .unwrap()
    }

    #[test]
    fn evaluates_cosine() {
        let t = one_qubit_rx();
        for theta in [0.3, 1.1, 2.9] {
            assert!((t.evaluate(0, &[theta]).unwrap() - f64::cos(theta)).abs() < 1e-12);
        }
        assert!(matches!(t.evaluate(0, &[0.1, 0.2]), Err(Error::Shape(_))));
    }

    #[test]
    fn shift_applies_to_one_appearance() {
        let t = one_qubit_rx();
        let shift = Shift {
            appearance: 0,
            offset: 0,
            delta: std::f64::consts::FRAC_PI_2,
        };
        let v = t.evaluate_shifted(0, &[0.4], Some(shift)).unwrap();
        assert!((v - (0.4f64 + std::f64::consts::FRAC_PI_2).cos()).abs() < 1e-12);
    }

    #[test]
    fn rejects_overlapping_slots_and_gaps() {
        let overlapping = LayerSpec {
            slots: vec![
                Slot::Fixed {
                    gate: GateOp::PauliX { target: 0 },
                },
                Slot::Param {
                    kind: ParamKind::RotationZ,
                    index: 0,
                    qubits: vec![0],
                },
            ],
        };
        assert!(CircuitTemplate::new(1, vec![overlapping], Observable::z(0, 1)).is_err());
        let gap = LayerSpec {
            slots: vec![Slot::Param {
                kind: ParamKind::RotationZ,
                index: 1,
                qubits: vec![0],
            }],
        };
        assert!(CircuitTemplate::new(1, vec![gap], Observable::z(0, 1)).is_err());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let t = one_qubit_rx();
        let back = CircuitTemplate::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        let tampered = t.to_json().unwrap().replace("\"param_count\": 1", "\"param_count\": 2");
        assert!(CircuitTemplate::from_json(&tampered).is_err());
    }
}
