use serde::{Deserialize, Serialize};

use super::kak::brick_angles;
use crate::ansatz::euler_zyz;
use crate::error::{Error, Result};
use crate::statevec::matrix::{self, CMatrix, C64, ONE, ZERO};
use crate::statevec::{circuit_matrix, GateOp};

/// Largest adder register with a built-in decomposition.
pub const MAX_DECOMPOSED_ADDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Y,
    Z,
}

/// Uniformly controlled rotation: angle `angles[j]` on `target` when the
/// controls read j (first control most significant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ucr {
    pub axis: Axis,
    pub controls: Vec<usize>,
    pub target: usize,
    pub angles: Vec<f64>,
}

fn gray(l: usize) -> usize {
    l ^ (l >> 1)
}

impl Ucr {
    /// Rotations interleaved with CNOTs along a Gray-code ladder.
    pub fn gates(&self) -> Vec<GateOp> {
        let k = self.controls.len();
        let rot = |angle: f64| match self.axis {
            Axis::Y => GateOp::RotationY {
                angle,
                target: self.target,
            },
            Axis::Z => GateOp::RotationZ {
                angle,
                target: self.target,
            },
        };
        if k == 0 {
            return vec![rot(self.angles[0])];
        }
        let m = 1usize << k;
        let scale = 1.0 / m as f64;
        let mut out = Vec::with_capacity(2 * m);
        for l in 0..m {
            let g = gray(l);
            let theta: f64 = self
                .angles
                .iter()
                .enumerate()
                .map(|(j, a)| if (j & g).count_ones() % 2 == 0 { *a } else { -a })
                .sum::<f64>()
                * scale;
            out.push(rot(theta));
            let d = (gray(l) ^ gray((l + 1) % m)).trailing_zeros() as usize;
            out.push(GateOp::cnot(self.controls[k - 1 - d], self.target));
        }
        out
    }

    pub fn inverse(&self) -> Ucr {
        Ucr {
            angles: self.angles.iter().map(|a| -a).collect(),
            ..self.clone()
        }
    }
}

/// Rotations preparing `amplitudes` on `qubits` from |0…0⟩ up to a global
/// phase: RY levels top-down, then (when `with_phases`) RZ levels. The
/// sequence of controls and targets depends only on the register size.
pub fn preparation_ucrs(amplitudes: &[C64], qubits: &[usize], with_phases: bool) -> Result<Vec<Ucr>> {
    let m = qubits.len();
    if amplitudes.len() != 1usize << m {
        return Err(Error::Shape(format!(
            "{} amplitudes for {m} qubits",
            amplitudes.len()
        )));
    }
    if !with_phases && amplitudes.iter().any(|a| a.im.abs() > 1e-12 || a.re < -1e-12) {
        return Err(Error::Validation(
            "phase-free preparation needs real non-negative amplitudes".into(),
        ));
    }
    let mut out = Vec::new();
    for k in 0..m {
        let rest = m - k;
        let angles = (0..1usize << k)
            .map(|j| {
                let half = 1usize << (rest - 1);
                let base = j << rest;
                let w = |lo: usize| -> f64 {
                    amplitudes[base + lo..base + lo + half]
                        .iter()
                        .map(|a| a.norm_sqr())
                        .sum::<f64>()
                        .sqrt()
                };
                2.0 * w(half).atan2(w(0))
            })
            .collect();
        out.push(Ucr {
            axis: Axis::Y,
            controls: qubits[..k].to_vec(),
            target: qubits[k],
            angles,
        });
    }
    if with_phases {
        let mut omega: Vec<f64> = amplitudes.iter().map(|a| a.arg()).collect();
        let mut levels = Vec::new();
        for k in (0..m).rev() {
            let angles: Vec<f64> = (0..1usize << k).map(|j| omega[2 * j + 1] - omega[2 * j]).collect();
            omega = (0..1usize << k).map(|j| (omega[2 * j] + omega[2 * j + 1]) / 2.0).collect();
            levels.push(Ucr {
                axis: Axis::Z,
                controls: qubits[..k].to_vec(),
                target: qubits[k],
                angles,
            });
        }
        levels.reverse();
        out.extend(levels);
    }
    Ok(out)
}

/// Gate list preparing `amplitudes` on `qubits`.
pub fn prepare_state(amplitudes: &[C64], qubits: &[usize], with_phases: bool) -> Result<Vec<GateOp>> {
    Ok(preparation_ucrs(amplitudes, qubits, with_phases)?
        .iter()
        .flat_map(Ucr::gates)
        .collect())
}

fn one_qubit(m: CMatrix, target: usize) -> GateOp {
    GateOp::unitary(m, vec![target])
}

/// Principal square root of a 2×2 unitary.
pub fn unitary_sqrt(u: &CMatrix) -> CMatrix {
    let delta = u.0.determinant().arg() / 2.0;
    let w = &u.0 * C64::from_polar(1.0, -delta);
    let cos_phi = ((w[(0, 0)] + w[(1, 1)]).re / 2.0).clamp(-1.0, 1.0);
    let phi = cos_phi.acos();
    let id = DMatrixC::identity(2, 2);
    let n_sigma = if phi.sin().abs() < 1e-12 {
        matrix::pauli_z().0
    } else {
        (&w - &id * C64::new(cos_phi, 0.0)) * (crate::statevec::matrix::I / phi.sin())
    };
    let root = (&id * C64::new((phi / 2.0).cos(), 0.0)) - n_sigma * (crate::statevec::matrix::I * (phi / 2.0).sin());
    CMatrix(root * C64::from_polar(1.0, delta / 2.0))
}

type DMatrixC = nalgebra::DMatrix<C64>;

fn controlled_matrix(u: &CMatrix) -> CMatrix {
    let mut m = CMatrix::identity(4);
    for r in 0..2 {
        for c in 0..2 {
            m.0[(2 + r, 2 + c)] = u.0[(r, c)];
        }
    }
    m
}

/// U on `target` when every control reads 1, exact including phase.
fn mcu_all_ones(controls: &[usize], target: usize, u: &CMatrix, out: &mut Vec<GateOp>) {
    match controls {
        [] => out.push(one_qubit(u.clone(), target)),
        [c] => out.push(GateOp::unitary(controlled_matrix(u), vec![*c, target])),
        [rest @ .., last] => {
            let v = unitary_sqrt(u);
            mcu_all_ones(&[*last], target, &v, out);
            mcu_all_ones(rest, *last, &matrix::pauli_x(), out);
            mcu_all_ones(&[*last], target, &v.adjoint(), out);
            mcu_all_ones(rest, *last, &matrix::pauli_x(), out);
            mcu_all_ones(rest, target, &v, out);
        }
    }
}

/// U on `target` when control i reads `pattern[i]`.
pub fn multi_controlled(controls: &[usize], pattern: &[bool], target: usize, u: &CMatrix) -> Vec<GateOp> {
    let flips: Vec<GateOp> = controls
        .iter()
        .zip(pattern)
        .filter(|(_, p)| !**p)
        .map(|(&q, _)| GateOp::PauliX { target: q })
        .collect();
    let mut out = flips.clone();
    mcu_all_ones(controls, target, u, &mut out);
    out.extend(flips);
    out
}

/// CNOT-based exact realization of a two-qubit unitary on (a, b).
pub fn two_qubit_gates(u: &CMatrix, a: usize, b: usize) -> Result<Vec<GateOp>> {
    let angles = brick_angles(u)?;
    let e = |k: usize| euler_zyz(angles[k], angles[k + 1], angles[k + 2]);
    let h = matrix::hadamard();
    let s = CMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, matrix::I]]);
    let sh = CMatrix(&s.0 * &h.0);
    let zz = |theta: f64, out: &mut Vec<GateOp>| {
        out.push(GateOp::cnot(0, 1));
        out.push(GateOp::RotationZ {
            angle: -2.0 * theta,
            target: 1,
        });
        out.push(GateOp::cnot(0, 1));
    };
    let mut local = vec![one_qubit(e(0), 0), one_qubit(e(3), 1)];
    for (basis, theta) in [(&h, angles[6]), (&sh, angles[7])] {
        local.push(one_qubit(basis.adjoint(), 0));
        local.push(one_qubit(basis.adjoint(), 1));
        zz(theta, &mut local);
        local.push(one_qubit(basis.clone(), 0));
        local.push(one_qubit(basis.clone(), 1));
    }
    zz(angles[8], &mut local);
    local.push(one_qubit(e(9), 0));
    local.push(one_qubit(e(12), 1));
    let got = circuit_matrix(&local, 2)?;
    let (mut r, mut c) = (0, 0);
    for i in 0..4 {
        for j in 0..4 {
            if u.0[(i, j)].norm() > u.0[(r, c)].norm() {
                (r, c) = (i, j);
            }
        }
    }
    let phase = u.0[(r, c)] / got.0[(r, c)];
    if let GateOp::Unitary { matrix, .. } = &mut local[0] {
        matrix.0 *= phase / phase.norm();
    }
    Ok(local.iter().map(|g| g.relabel(&[a, b])).collect())
}

/// Flattens a gate into gates on at most two qubits, exact including phase.
pub fn expand_gate(gate: &GateOp) -> Result<Vec<GateOp>> {
    match gate {
        GateOp::Unitary { targets, .. } if targets.len() > 2 => Err(Error::Decomposition(format!(
            "dense gate on {} qubits",
            targets.len()
        ))),
        GateOp::Adder { targets, amount } => {
            let t = targets.len();
            if t > MAX_DECOMPOSED_ADDER {
                return Err(Error::Decomposition(format!("adder on {t} qubits")));
            }
            let reps = amount % (1u64 << t);
            let mut out = Vec::new();
            for _ in 0..reps {
                for i in 0..t {
                    let controls = &targets[i + 1..];
                    out.extend(multi_controlled(
                        controls,
                        &vec![true; controls.len()],
                        targets[i],
                        &matrix::pauli_x(),
                    ));
                }
            }
            Ok(out)
        }
        GateOp::Controlled {
            controls,
            pattern,
            body,
        } => {
            let mut out = Vec::new();
            for g in body {
                for p in expand_gate(g)? {
                    out.extend(control_primitive(controls, pattern, &p)?);
                }
            }
            Ok(out)
        }
        other => Ok(vec![other.clone()]),
    }
}

/// Adds controls to a gate on at most two qubits.
fn control_primitive(controls: &[usize], pattern: &[bool], p: &GateOp) -> Result<Vec<GateOp>> {
    let support = p.support();
    match support.len() {
        1 => Ok(multi_controlled(controls, pattern, support[0], &p.matrix()?)),
        2 => {
            if let GateOp::Controlled {
                controls: inner,
                pattern: inner_pattern,
                body,
            } = p
            {
                if inner.len() == 1 && body.len() == 1 && body[0].support().len() == 1 {
                    let mut c = controls.to_vec();
                    c.push(inner[0]);
                    let mut pat = pattern.to_vec();
                    pat.push(inner_pattern[0]);
                    return Ok(multi_controlled(&c, &pat, body[0].support()[0], &body[0].matrix()?));
                }
            }
            let mut out = Vec::new();
            for g in two_qubit_gates(&p.matrix()?, support[0], support[1])? {
                out.extend(control_primitive(controls, pattern, &g)?);
            }
            Ok(out)
        }
        n => Err(Error::Decomposition(format!("primitive on {n} qubits"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::matrix::max_abs_diff;
    use crate::statevec::{overlap, StateVector};
    use rand::Rng;

    fn random_state(m: usize, seed: u64, real: bool) -> Vec<C64> {
        let mut rng = crate::rng::stream_rng(seed, 0, &[]);
        let mut v: Vec<C64> = (0..1 << m)
            .map(|_| {
                if real {
                    C64::new(rng.gen_range(0.0..1.0), 0.0)
                } else {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            })
            .collect();
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= n);
        v
    }

    #[test]
    fn ucr_matches_explicit_controlled_rotations() {
        for axis in [Axis::Y, Axis::Z] {
            for k in 0..4 {
                let angles: Vec<f64> = (0..1 << k).map(|j| 0.3 + 0.71 * j as f64).collect();
                let controls: Vec<usize> = (0..k).collect();
                let ucr = Ucr {
                    axis,
                    controls: controls.clone(),
                    target: k,
                    angles: angles.clone(),
                };
                let mut explicit = Vec::new();
                for (j, a) in angles.iter().enumerate() {
                    let pattern: Vec<bool> = (0..k).map(|i| j >> (k - 1 - i) & 1 == 1).collect();
                    let rot = match axis {
                        Axis::Y => GateOp::RotationY { angle: *a, target: k },
                        Axis::Z => GateOp::RotationZ { angle: *a, target: k },
                    };
                    explicit.push(GateOp::Controlled {
                        controls: controls.clone(),
                        pattern,
                        body: vec![rot],
                    });
                }
                let a = circuit_matrix(&ucr.gates(), k + 1).unwrap();
                let b = circuit_matrix(&explicit, k + 1).unwrap();
                assert!(max_abs_diff(&a.0, &b.0) < 1e-12, "axis {axis:?} k {k}");
            }
        }
    }

    #[test]
    fn prepares_random_states() {
        for m in 1..5 {
            for (seed, real) in [(1, true), (2, false), (3, false)] {
                let target = random_state(m, seed + m as u64, real);
                let qubits: Vec<usize> = (0..m).collect();
                let gates = prepare_state(&target, &qubits, !real).unwrap();
                let mut s = StateVector::zero_state(m).unwrap();
                s.apply_all(&gates).unwrap();
                let t = StateVector::from_amplitudes(target).unwrap();
                assert!((overlap(&s, &t).unwrap().norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_free_preparation_rejects_signs() {
        let v = [C64::new(0.6, 0.0), C64::new(-0.8, 0.0)];
        assert!(prepare_state(&v, &[0], false).is_err());
    }

    #[test]
    fn square_root_squares_back() {
        for m in [matrix::pauli_x(), matrix::hadamard(), euler_zyz(0.3, 1.0, -2.0), CMatrix::identity(2)] {
            let r = unitary_sqrt(&m);
            assert!(max_abs_diff(&(&r.0 * &r.0), &m.0) < 1e-12);
        }
        let minus = CMatrix(CMatrix::identity(2).0 * C64::new(-1.0, 0.0));
        let r = unitary_sqrt(&minus);
        assert!(max_abs_diff(&(&r.0 * &r.0), &minus.0) < 1e-12);
    }

    #[test]
    fn multi_controlled_matches_masked_block() {
        let u = euler_zyz(0.4, 1.3, -0.2);
        for k in 1..4 {
            let controls: Vec<usize> = (0..k).collect();
            let pattern: Vec<bool> = (0..k).map(|i| i % 2 == 0).collect();
            let gates = multi_controlled(&controls, &pattern, k, &u);
            assert!(gates.iter().all(|g| g.support().len() <= 2));
            let reference = GateOp::Controlled {
                controls,
                pattern,
                body: vec![GateOp::unitary(u.clone(), vec![k])],
            };
            let a = circuit_matrix(&gates, k + 1).unwrap();
            let b = circuit_matrix(&[reference], k + 1).unwrap();
            assert!(max_abs_diff(&a.0, &b.0) < 1e-12);
        }
    }

    #[test]
    fn two_qubit_realization_is_exact() {
        let angles: Vec<f64> = (0..15).map(|k| 0.2 * k as f64 - 1.3).collect();
        let u = crate::ansatz::brick_matrix(&angles);
        for (a, b) in [(0, 1), (1, 0)] {
            let gates = two_qubit_gates(&u, a, b).unwrap();
            let got = circuit_matrix(&gates, 2).unwrap();
            let want = circuit_matrix(&[GateOp::unitary(u.clone(), vec![a, b])], 2).unwrap();
            assert!(max_abs_diff(&got.0, &want.0) < 1e-10);
        }
    }

    #[test]
    fn expansions_are_exact() {
        let brick = crate::ansatz::brick_matrix(&[0.3; 15]);
        let cases = vec![
            (
                GateOp::Adder {
                    targets: vec![0, 1, 2],
                    amount: 3,
                },
                3,
            ),
            (
                GateOp::Controlled {
                    controls: vec![0, 3],
                    pattern: vec![true, false],
                    body: vec![GateOp::unitary(brick, vec![1, 2]), GateOp::cnot(2, 1)],
                },
                4,
            ),
            (
                GateOp::Controlled {
                    controls: vec![0],
                    pattern: vec![false],
                    body: vec![GateOp::Adder {
                        targets: vec![1, 2],
                        amount: 1,
                    }],
                },
                3,
            ),
        ];
        for (g, n) in cases {
            let flat = expand_gate(&g).unwrap();
            assert!(flat.iter().all(|p| p.support().len() <= 2));
            let a = circuit_matrix(&flat, n).unwrap();
            let b = circuit_matrix(&[g], n).unwrap();
            assert!(max_abs_diff(&a.0, &b.0) < 1e-10);
        }
        let wide = GateOp::Adder {
            targets: vec![0, 1, 2, 3, 4],
            amount: 1,
        };
        assert!(matches!(expand_gate(&wide), Err(Error::Decomposition(_))));
    }
}
