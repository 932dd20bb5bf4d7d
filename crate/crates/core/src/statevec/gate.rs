use serde::{Deserialize, Serialize};

use super::matrix::{self, CMatrix, C64, ONE, ZERO};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Unitary tolerance for dense gate matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// A gate acting on explicit qubit indices of a register.
///
/// Qubit 0 is the most significant bit of the amplitude index. Multi-qubit
/// targets are listed most significant first, so a dense 4×4 matrix on
/// `[a, b]` indexes its rows as `2·bit(a) + bit(b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateOp {
    Unitary {
        matrix: CMatrix,
        targets: Vec<usize>,
    },
    RotationX {
        angle: f64,
        target: usize,
    },
    RotationY {
        angle: f64,
        target: usize,
    },
    RotationZ {
        angle: f64,
        target: usize,
    },
    Hadamard {
        target: usize,
    },
    PauliX {
        target: usize,
    },
    /// Applies `body` on the subspace where every control qubit reads its
    /// pattern bit. Identity elsewhere.
    Controlled {
        controls: Vec<usize>,
        pattern: Vec<bool>,
        body: Vec<GateOp>,
    },
    /// |b⟩ ↦ |b + amount mod 2^t⟩ on the register `targets` (MSB first).
    Adder {
        targets: Vec<usize>,
        amount: u64,
    },
}

impl GateOp {
    pub fn unitary(matrix: CMatrix, targets: Vec<usize>) -> Self {
        GateOp::Unitary { matrix, targets }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp::Controlled {
            controls: vec![control],
            pattern: vec![true],
            body: vec![GateOp::PauliX { target }],
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        let mut m = CMatrix::identity(4);
        m.0[(1, 1)] = ZERO;
        m.0[(2, 2)] = ZERO;
        m.0[(1, 2)] = ONE;
        m.0[(2, 1)] = ONE;
        GateOp::Unitary {
            matrix: m,
            targets: vec![a, b],
        }
    }

    /// Every qubit the gate touches, controls first, in first-seen order.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_support(&mut out);
        out
    }

    fn collect_support(&self, out: &mut Vec<usize>) {
        let push = |q: usize, out: &mut Vec<usize>| {
            if !out.contains(&q) {
                out.push(q);
            }
        };
        match self {
            GateOp::Unitary { targets, .. } | GateOp::Adder { targets, .. } => {
                for &q in targets {
                    push(q, out);
                }
            }
            GateOp::RotationX { target, .. }
            | GateOp::RotationY { target, .. }
            | GateOp::RotationZ { target, .. }
            | GateOp::Hadamard { target }
            | GateOp::PauliX { target } => push(*target, out),
            GateOp::Controlled { controls, body, .. } => {
                for &q in controls {
                    push(q, out);
                }
                for g in body {
                    g.collect_support(out);
                }
            }
        }
    }

    /// Checks indices against an `n_qubits` register and dense matrices for
    /// unitarity.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check_range = |qs: &[usize]| -> Result<()> {
            for &q in qs {
                if q >= n_qubits {
                    return Err(Error::Index(format!(
                        "qubit {q} on a {n_qubits}-qubit register"
                    )));
                }
            }
            for (i, a) in qs.iter().enumerate() {
                if qs[i + 1..].contains(a) {
                    return Err(Error::Index(format!("repeated qubit {a} in {qs:?}")));
                }
            }
            Ok(())
        };
        match self {
            GateOp::Unitary { matrix, targets } => {
                check_range(targets)?;
                let dim = 1usize << targets.len();
                if !matrix.is_square() || matrix.dim() != dim {
                    return Err(Error::Validation(format!(
                        "{}x{} matrix on {} targets",
                        matrix.0.nrows(),
                        matrix.0.ncols(),
                        targets.len()
                    )));
                }
                let defect = matrix.unitarity_defect();
                if defect > UNITARY_TOL {
                    return Err(Error::Validation(format!(
                        "matrix is not unitary (defect {defect:.3e})"
                    )));
                }
                Ok(())
            }
            GateOp::RotationX { target, .. }
            | GateOp::RotationY { target, .. }
            | GateOp::RotationZ { target, .. }
            | GateOp::Hadamard { target }
            | GateOp::PauliX { target } => check_range(&[*target]),
            GateOp::Controlled {
                controls,
                pattern,
                body,
            } => {
                check_range(controls)?;
                if pattern.len() != controls.len() {
                    return Err(Error::Validation(format!(
                        "control pattern of length {} for {} controls",
                        pattern.len(),
                        controls.len()
                    )));
                }
                for g in body {
                    g.validate(n_qubits)?;
                    if let Some(q) = g.support().iter().find(|q| controls.contains(q)) {
                        return Err(Error::Index(format!(
                            "qubit {q} is both control and target"
                        )));
                    }
                }
                Ok(())
            }
            GateOp::Adder { targets, .. } => {
                if targets.is_empty() || targets.len() > 20 {
                    return Err(Error::Capacity(format!(
                        "adder on {} qubits",
                        targets.len()
                    )));
                }
                check_range(targets)
            }
        }
    }

    /// Inverse gate.
    pub fn dagger(&self) -> GateOp {
        match self {
            GateOp::Unitary { matrix, targets } => GateOp::Unitary {
                matrix: matrix.adjoint(),
                targets: targets.clone(),
            },
            GateOp::RotationX { angle, target } => GateOp::RotationX {
                angle: -angle,
                target: *target,
            },
            GateOp::RotationY { angle, target } => GateOp::RotationY {
                angle: -angle,
                target: *target,
            },
            GateOp::RotationZ { angle, target } => GateOp::RotationZ {
                angle: -angle,
                target: *target,
            },
            GateOp::Hadamard { .. } | GateOp::PauliX { .. } => self.clone(),
            GateOp::Controlled {
                controls,
                pattern,
                body,
            } => GateOp::Controlled {
                controls: controls.clone(),
                pattern: pattern.clone(),
                body: inverse_circuit(body),
            },
            GateOp::Adder { targets, amount } => {
                let modulus = 1u64 << targets.len();
                GateOp::Adder {
                    targets: targets.clone(),
                    amount: (modulus - amount % modulus) % modulus,
                }
            }
        }
    }

    /// Renames every qubit `q` to `map[q]`.
    pub fn relabel(&self, map: &[usize]) -> GateOp {
        let m = |q: &usize| map[*q];
        match self {
            GateOp::Unitary { matrix, targets } => GateOp::Unitary {
                matrix: matrix.clone(),
                targets: targets.iter().map(m).collect(),
            },
            GateOp::RotationX { angle, target } => GateOp::RotationX {
                angle: *angle,
                target: m(target),
            },
            GateOp::RotationY { angle, target } => GateOp::RotationY {
                angle: *angle,
                target: m(target),
            },
            GateOp::RotationZ { angle, target } => GateOp::RotationZ {
                angle: *angle,
                target: m(target),
            },
            GateOp::Hadamard { target } => GateOp::Hadamard { target: m(target) },
            GateOp::PauliX { target } => GateOp::PauliX { target: m(target) },
            GateOp::Controlled {
                controls,
                pattern,
                body,
            } => GateOp::Controlled {
                controls: controls.iter().map(m).collect(),
                pattern: pattern.clone(),
                body: body.iter().map(|g| g.relabel(map)).collect(),
            },
            GateOp::Adder { targets, amount } => GateOp::Adder {
                targets: targets.iter().map(m).collect(),
                amount: *amount,
            },
        }
    }

    /// Dense matrix of the gate over `support()` (first support qubit most
    /// significant), built column by column from basis states.
    pub fn matrix(&self) -> Result<CMatrix> {
        let support = self.support();
        let k = support.len();
        let mut local = vec![usize::MAX; support.iter().max().map_or(0, |m| m + 1)];
        for (i, &q) in support.iter().enumerate() {
            local[q] = i;
        }
        let g = self.relabel(&local);
        let dim = 1usize << k;
        let mut out = CMatrix::identity(dim);
        for col in 0..dim {
            let mut s = StateVector::basis_state(k, col)?;
            s.apply_gate(&g)?;
            for (row, a) in s.amplitudes().iter().enumerate() {
                out.0[(row, col)] = *a;
            }
        }
        Ok(out)
    }

    /// 2×2 matrix for single-qubit kinds.
    pub(crate) fn single_qubit_matrix(&self) -> Option<[C64; 4]> {
        let m = match self {
            GateOp::RotationX { angle, .. } => matrix::rx(*angle),
            GateOp::RotationY { angle, .. } => matrix::ry(*angle),
            GateOp::RotationZ { angle, .. } => matrix::rz(*angle),
            GateOp::Hadamard { .. } => matrix::hadamard(),
            GateOp::PauliX { .. } => matrix::pauli_x(),
            GateOp::Unitary { matrix, targets } if targets.len() == 1 => matrix.clone(),
            _ => return None,
        };
        Some([m.0[(0, 0)], m.0[(0, 1)], m.0[(1, 0)], m.0[(1, 1)]])
    }
}

/// Inverse of a gate sequence: reversed order, each gate daggered.
pub fn inverse_circuit(gates: &[GateOp]) -> Vec<GateOp> {
    gates.iter().rev().map(GateOp::dagger).collect()
}

/// Dense unitary of a gate sequence on `n_qubits`.
pub fn circuit_matrix(gates: &[GateOp], n_qubits: usize) -> Result<CMatrix> {
    let dim = 1usize << n_qubits;
    let mut out = CMatrix::identity(dim);
    for col in 0..dim {
        let mut s = StateVector::basis_state(n_qubits, col)?;
        for g in gates {
            s.apply_gate(g)?;
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            out.0[(row, col)] = *a;
        }
    }
    Ok(out)
}
