#![allow(dead_code)]

use rand::Rng;
use varivery::kernel::CircuitFeatureMap;
use varivery::statevec::matrix::random_unitary;
use varivery::statevec::{GateOp, StateVector, C64};

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let mut v: Vec<C64> = (0..1 << n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(v).unwrap()
}

/// A mix of rotations, Hadamards, CNOTs, controlled blocks, adders and
/// dense one- and two-qubit unitaries.
pub fn random_circuit<R: Rng>(n: usize, len: usize, rng: &mut R) -> Vec<GateOp> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let q = rng.gen_range(0..n);
        let angle = rng.gen_range(-3.0..3.0);
        let other = |rng: &mut R| loop {
            let r = rng.gen_range(0..n);
            if r != q {
                break r;
            }
        };
        let kind = if n == 1 { rng.gen_range(0..5) } else { rng.gen_range(0..9) };
        out.push(match kind {
            0 => GateOp::RotationX { angle, target: q },
            1 => GateOp::RotationY { angle, target: q },
            2 => GateOp::RotationZ { angle, target: q },
            3 => GateOp::Hadamard { target: q },
            4 => GateOp::unitary(random_unitary(2, rng), vec![q]),
            5 => GateOp::cnot(q, other(rng)),
            6 => GateOp::unitary(random_unitary(4, rng), vec![q, other(rng)]),
            7 => {
                let r = other(rng);
                GateOp::Controlled {
                    controls: vec![r],
                    pattern: vec![rng.gen_bool(0.5)],
                    body: vec![GateOp::RotationY { angle, target: q }],
                }
            }
            _ => GateOp::Adder {
                targets: vec![q, other(rng)],
                amount: rng.gen_range(1..4),
            },
        });
    }
    out
}

/// Feature map on `n` qubits with a random preparation circuit per input
/// 0..n_inputs.
pub fn random_feature_map<R: Rng>(n: usize, n_inputs: u64, rng: &mut R) -> CircuitFeatureMap {
    CircuitFeatureMap {
        name: "random".into(),
        n_qubits: n,
        circuits: (0..n_inputs)
            .map(|x| (x, random_circuit(n, 2 + 2 * n, rng)))
            .collect(),
    }
}
