use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kak::brick_angles;
use super::synthesis::expand_gate;
use crate::ansatz::{
    brick_gate, brick_pairs, identity_angles, CircuitTemplate, DataGate, LayerSpec, ParamKind, Slot,
    BRICK_PARAMS,
};
use crate::error::{Error, Result};
use crate::statevec::matrix::CMatrix;
use crate::statevec::{circuit_matrix, GateOp, Observable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Gates that do not depend on the input.
    Param,
    /// Gates that do.
    Data,
}

/// A run of gates compiled together. Blocks never fuse across segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub role: Role,
    pub gates: Vec<GateOp>,
}

/// One grid position (layer, (qubit, qubit + 1)) with its resolved angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrickSlot {
    pub layer: usize,
    pub qubit: usize,
    pub role: Role,
    /// True for identity bricks filling otherwise empty grid positions.
    pub padding: bool,
    pub angles: Vec<f64>,
}

/// A full 1-D brickwork grid: every (layer, pair) position holds one brick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrickworkLayout {
    pub n_qubits: usize,
    pub depth: usize,
    pub slots: Vec<BrickSlot>,
}

struct Block {
    qubit: usize,
    role: Role,
    matrix: CMatrix,
}

/// Dense matrix of a gate on (q, q + 1) with q most significant.
fn pair_matrix(g: &GateOp, q: usize, n: usize) -> Result<CMatrix> {
    let mut map = vec![0; n];
    map[q] = 0;
    map[q + 1] = 1;
    circuit_matrix(&[g.relabel(&map)], 2)
}

/// Expands and routes `gates` into single-qubit and adjacent two-qubit
/// primitives. Distant pairs move the lower qubit up by SWAPs and back.
fn route(gates: &[GateOp], n: usize) -> Result<Vec<GateOp>> {
    let mut out = Vec::new();
    for g in gates {
        for p in expand_gate(g)? {
            let s = p.support();
            match s.len() {
                0 | 1 => out.push(p),
                2 => {
                    let (lo, hi) = (s[0].min(s[1]), s[0].max(s[1]));
                    if hi >= n {
                        return Err(Error::Index(format!("gate on qubit {hi} of {n}")));
                    }
                    let swaps: Vec<GateOp> = (lo..hi - 1).map(|q| GateOp::swap(q, q + 1)).collect();
                    out.extend(swaps.iter().cloned());
                    let mut map: Vec<usize> = (0..n).collect();
                    map[lo] = hi - 1;
                    out.push(p.relabel(&map));
                    out.extend(swaps.into_iter().rev());
                }
                k => {
                    return Err(Error::Decomposition(format!(
                        "gate on {k} qubits after expansion"
                    )))
                }
            }
        }
    }
    Ok(out)
}

/// Fuses one segment's primitives into adjacent two-qubit blocks.
fn fuse(seg: &Segment, n: usize, blocks: &mut Vec<Block>) -> Result<()> {
    let first = blocks.len();
    let mut pending: Vec<Option<CMatrix>> = vec![None; n];
    let mut last: Vec<Option<usize>> = vec![None; n];
    for p in route(&seg.gates, n)? {
        let s = p.support();
        if s.is_empty() {
            continue;
        }
        if s.len() == 1 {
            let q = s[0];
            let m = p.matrix()?;
            pending[q] = Some(match pending[q].take() {
                Some(prev) => CMatrix(m.0 * prev.0),
                None => m,
            });
            continue;
        }
        let q = s[0].min(s[1]);
        let id = CMatrix::identity(2);
        let before = pending[q]
            .take()
            .unwrap_or_else(|| id.clone())
            .kron(&pending[q + 1].take().unwrap_or(id));
        let m = CMatrix(pair_matrix(&p, q, n)?.0 * before.0);
        match (last[q], last[q + 1]) {
            (Some(a), Some(b)) if a == b && blocks[a].qubit == q => {
                blocks[a].matrix = CMatrix(m.0 * &blocks[a].matrix.0);
            }
            _ => {
                blocks.push(Block {
                    qubit: q,
                    role: seg.role,
                    matrix: m,
                });
                last[q] = Some(blocks.len() - 1);
                last[q + 1] = Some(blocks.len() - 1);
            }
        }
    }
    let id = CMatrix::identity(2);
    for q in 0..n {
        let Some(m) = pending[q].take() else { continue };
        if let Some(b) = last[q] {
            let lifted = if blocks[b].qubit == q { m.kron(&id) } else { id.kron(&m) };
            blocks[b].matrix = CMatrix(lifted.0 * &blocks[b].matrix.0);
            continue;
        }
        let (pair, lifted) = if q + 1 < n { (q, m.kron(&id)) } else { (q - 1, id.kron(&m)) };
        blocks.push(Block {
            qubit: pair,
            role: seg.role,
            matrix: lifted,
        });
        last[pair] = Some(blocks.len() - 1);
        last[pair + 1] = Some(blocks.len() - 1);
    }
    debug_assert!(blocks[first..].iter().all(|b| b.qubit + 1 < n));
    Ok(())
}

/// Compiles segments into a brickwork grid. Blocks are scheduled as early
/// as possible on layers whose parity matches the block's lower qubit, and
/// empty positions receive identity bricks.
pub fn compile_segments(segments: &[Segment], n_qubits: usize) -> Result<BrickworkLayout> {
    if n_qubits < 2 {
        return Err(Error::Capacity(format!("brickwork on {n_qubits} qubits")));
    }
    let mut blocks = Vec::new();
    for seg in segments {
        fuse(seg, n_qubits, &mut blocks)?;
    }
    let mut free = vec![0usize; n_qubits];
    let mut placed = std::collections::BTreeMap::new();
    for b in &blocks {
        let q = b.qubit;
        let mut layer = free[q].max(free[q + 1]);
        if layer % 2 != q % 2 {
            layer += 1;
        }
        free[q] = layer + 1;
        free[q + 1] = layer + 1;
        placed.insert((layer, q), b);
    }
    let depth = free.iter().copied().max().unwrap_or(0);
    let mut slots = Vec::new();
    for layer in 0..depth {
        for (q, _) in brick_pairs(n_qubits, layer) {
            slots.push(match placed.get(&(layer, q)) {
                Some(b) => BrickSlot {
                    layer,
                    qubit: q,
                    role: b.role,
                    padding: false,
                    angles: brick_angles(&b.matrix)?.to_vec(),
                },
                None => BrickSlot {
                    layer,
                    qubit: q,
                    role: Role::Param,
                    padding: true,
                    angles: identity_angles().to_vec(),
                },
            });
        }
    }
    Ok(BrickworkLayout {
        n_qubits,
        depth,
        slots,
    })
}

/// Compiles a fully specified gate list (every brick parametrized).
pub fn compile_brickwork(gates: &[GateOp], n_qubits: usize) -> Result<BrickworkLayout> {
    compile_segments(
        &[Segment {
            role: Role::Param,
            gates: gates.to_vec(),
        }],
        n_qubits,
    )
}

impl BrickworkLayout {
    pub fn gates(&self) -> Vec<GateOp> {
        self.slots
            .iter()
            .map(|s| brick_gate(&s.angles, s.qubit, s.qubit + 1))
            .collect()
    }

    /// depth-by-position brick count times 15.
    pub fn total_params(&self) -> usize {
        self.slots.len() * BRICK_PARAMS
    }

    /// Angles of the input-independent bricks, in grid order.
    pub fn param_vector(&self) -> Vec<f64> {
        self.slots
            .iter()
            .filter(|s| s.role == Role::Param)
            .flat_map(|s| s.angles.iter().copied())
            .collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.slots.iter().filter(|s| s.role == role).count()
    }

    pub fn padding_count(&self) -> usize {
        self.slots.iter().filter(|s| s.padding).count()
    }

    /// Same grid, same roles and same padding positions.
    pub fn same_structure(&self, other: &BrickworkLayout) -> bool {
        self.n_qubits == other.n_qubits
            && self.depth == other.depth
            && self.slots.len() == other.slots.len()
            && self.slots.iter().zip(&other.slots).all(|(a, b)| {
                a.layer == b.layer && a.qubit == b.qubit && a.role == b.role && a.padding == b.padding
            })
    }
}

/// A compiled input-dependent family: parametrized bricks with θ resolved
/// by the compiler, and per-input lookup bricks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrickworkFamily {
    #[serde(flatten)]
    pub template: CircuitTemplate,
    pub depth: usize,
    pub total_params: usize,
    /// Resolved angles of every parametrized brick, in parameter order.
    pub param_map: Vec<BrickSlot>,
    #[serde(skip)]
    pub theta: Vec<f64>,
}

/// Compiles `source(x)` for every input of `domain`; the grid must not
/// depend on x. Data bricks become lookup tables over the domain.
pub fn compile_family<F>(
    source: F,
    domain: &[u64],
    n_qubits: usize,
    observable: Observable,
) -> Result<BrickworkFamily>
where
    F: Fn(u64) -> Result<Vec<Segment>> + Sync,
{
    if domain.is_empty() {
        return Err(Error::Validation("empty input domain".into()));
    }
    let layouts: Vec<BrickworkLayout> = domain
        .par_iter()
        .map(|&x| compile_segments(&source(x)?, n_qubits))
        .collect::<Result<_>>()?;
    let base = &layouts[0];
    if let Some(i) = layouts.iter().position(|l| !l.same_structure(base)) {
        return Err(Error::Decomposition(format!(
            "brickwork grid for input {} differs from input {}",
            domain[i], domain[0]
        )));
    }
    let mut layers: Vec<LayerSpec> = (0..base.depth).map(|_| LayerSpec::default()).collect();
    let mut param_map = Vec::new();
    let mut theta = Vec::new();
    for (k, slot) in base.slots.iter().enumerate() {
        let qubits = vec![slot.qubit, slot.qubit + 1];
        let entry = match slot.role {
            Role::Param => {
                let index = theta.len();
                theta.extend_from_slice(&slot.angles);
                param_map.push(slot.clone());
                Slot::Param {
                    kind: ParamKind::Brick,
                    index,
                    qubits,
                }
            }
            Role::Data => Slot::Data {
                gate: DataGate::Lookup {
                    qubits,
                    table: domain
                        .iter()
                        .zip(&layouts)
                        .map(|(&x, l)| {
                            let s = &l.slots[k];
                            (x, vec![brick_gate(&s.angles, s.qubit, s.qubit + 1)])
                        })
                        .collect(),
                },
            },
        };
        layers[slot.layer].slots.push(entry);
    }
    let template = CircuitTemplate::new(n_qubits, layers, observable)?;
    Ok(BrickworkFamily {
        template,
        depth: base.depth,
        total_params: base.total_params(),
        param_map,
        theta,
    })
}

impl BrickworkFamily {
    /// Template JSON with an added `param_map` section.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads the template and the resolved angles back.
    pub fn from_json(text: &str) -> Result<(CircuitTemplate, Vec<f64>)> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Validation("family JSON must be an object".into()))?;
        let map: Vec<BrickSlot> = serde_json::from_value(
            obj.remove("param_map")
                .ok_or_else(|| Error::Validation("missing param_map".into()))?,
        )?;
        obj.remove("depth");
        obj.remove("total_params");
        let template: CircuitTemplate = serde_json::from_value(value)?;
        let theta = map.into_iter().flat_map(|s| s.angles).collect();
        Ok((template, theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::phase_distance;
    use crate::statevec::StateVector;

    fn unitary_of(layout: &BrickworkLayout) -> CMatrix {
        circuit_matrix(&layout.gates(), layout.n_qubits).unwrap()
    }

    #[test]
    fn single_cnot_is_one_brick() {
        let layout = compile_brickwork(&[GateOp::cnot(0, 1)], 2).unwrap();
        assert_eq!(layout.slots.len(), 1);
        assert_eq!(layout.depth, 1);
        let want = GateOp::cnot(0, 1).matrix().unwrap();
        assert!(phase_distance(&unitary_of(&layout), &want) < 1e-10);
    }

    #[test]
    fn distance_two_cnot_routes_through_three_bricks() {
        let layout = compile_brickwork(&[GateOp::cnot(0, 2)], 3).unwrap();
        assert_eq!(layout.slots.len() - layout.padding_count(), 3);
        let want = circuit_matrix(&[GateOp::cnot(0, 2)], 3).unwrap();
        assert!(phase_distance(&unitary_of(&layout), &want) < 1e-10);
    }

    #[test]
    fn reversed_and_single_qubit_gates_fold_in() {
        let gates = vec![
            GateOp::Hadamard { target: 2 },
            GateOp::cnot(2, 1),
            GateOp::RotationY { angle: 0.4, target: 0 },
            GateOp::RotationX { angle: 0.9, target: 3 },
            GateOp::cnot(3, 0),
            GateOp::RotationZ { angle: 1.1, target: 1 },
        ];
        let layout = compile_brickwork(&gates, 4).unwrap();
        let want = circuit_matrix(&gates, 4).unwrap();
        assert!(phase_distance(&unitary_of(&layout), &want) < 1e-10);
    }

    #[test]
    fn lone_rotation_becomes_a_brick() {
        let layout = compile_brickwork(&[GateOp::RotationY { angle: 0.3, target: 1 }], 2).unwrap();
        assert_eq!(layout.slots.len(), 1);
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_all(&layout.gates()).unwrap();
        assert!((s.amplitudes()[1].norm() - (0.15f64).sin()).abs() < 1e-12);
    }

    #[test]
    fn empty_positions_are_identity_padded() {
        let layout = compile_brickwork(&[GateOp::cnot(0, 1), GateOp::cnot(0, 1)], 4).unwrap();
        assert_eq!(layout.depth, 1);
        assert_eq!(layout.slots.len(), 2);
        assert!(layout.slots[1].padding);
        assert_eq!(layout.total_params(), 30);
        assert!(layout.slots[1].angles.iter().all(|a| *a == 0.0));
    }

    #[test]
    fn wide_dense_gates_are_rejected() {
        let g = GateOp::unitary(CMatrix::identity(8), vec![0, 1, 2]);
        assert!(matches!(compile_brickwork(&[g], 3), Err(Error::Decomposition(_))));
    }

    #[test]
    fn data_segments_stay_separate() {
        let source = |x: u64| -> Result<Vec<Segment>> {
            Ok(vec![
                Segment {
                    role: Role::Param,
                    gates: vec![GateOp::Hadamard { target: 0 }],
                },
                Segment {
                    role: Role::Data,
                    gates: vec![GateOp::RotationY {
                        angle: x as f64,
                        target: 1,
                    }],
                },
            ])
        };
        let fam = compile_family(source, &[1, 2, 3], 2, Observable::z(1, 2)).unwrap();
        assert_eq!(fam.template.param_count(), 15);
        for x in 1..4u64 {
            let f = fam.template.evaluate(x, &fam.theta).unwrap();
            assert!((f - (x as f64).cos()).abs() < 1e-10);
        }
        let (t, theta) = BrickworkFamily::from_json(&fam.to_json().unwrap()).unwrap();
        assert_eq!(t, fam.template);
        assert_eq!(theta, fam.theta);
    }
}
