use crate::error::{Error, Result};
use crate::statevec::{overlap, tensor, GateOp, StateVector, MAX_QUBITS};

/// Largest counter register for the adder gadget.
pub const MAX_COUNTER_QUBITS: usize = 8;

/// A|b⟩ = |b + 1 mod 2^t⟩ on qubits 0..t (qubit 0 most significant).
pub fn adder_gate(t: usize) -> Result<GateOp> {
    if t == 0 || t > MAX_COUNTER_QUBITS {
        return Err(Error::Capacity(format!(
            "adder on {t} qubits (allowed 1..={MAX_COUNTER_QUBITS})"
        )));
    }
    Ok(GateOp::Adder {
        targets: (0..t).collect(),
        amount: 1,
    })
}

/// Ũ gates for a fixed input: `u` applied when every counter qubit reads 0,
/// then the counter incremented.
pub fn tilde_u_gates(u: &[GateOp], counter: &[usize]) -> Vec<GateOp> {
    vec![
        GateOp::Controlled {
            controls: counter.to_vec(),
            pattern: vec![false; counter.len()],
            body: u.to_vec(),
        },
        GateOp::Adder {
            targets: counter.to_vec(),
            amount: 1,
        },
    ]
}

/// Ũ(x) on n + t qubits for a circuit `u_of_x` on data qubits 0..n; the
/// counter occupies qubits n..n+t.
pub fn build_tilde_u(u_of_x: &[GateOp], n: usize, t: usize) -> Result<Vec<GateOp>> {
    if t == 0 || t > MAX_COUNTER_QUBITS {
        return Err(Error::Capacity(format!("counter of {t} qubits")));
    }
    if n == 0 || n + t > MAX_QUBITS {
        return Err(Error::Capacity(format!("{n} data + {t} counter qubits")));
    }
    for g in u_of_x {
        g.validate(n)?;
    }
    let counter: Vec<usize> = (n..n + t).collect();
    Ok(tilde_u_gates(u_of_x, &counter))
}

/// |⟨(U|0⟩ ⊗ |L⟩) | Ũ^L |0⟩|0⟩⟩| for `u` on data qubits 0..n and a
/// t-qubit counter.
pub fn telescoping_overlap(u: &[GateOp], n: usize, t: usize, layers: usize) -> Result<f64> {
    if layers >= 1 << t {
        return Err(Error::Validation(format!("{layers} layers with a {t}-qubit counter")));
    }
    let g = build_tilde_u(u, n, t)?;
    let mut s = StateVector::zero_state(n + t)?;
    for _ in 0..layers {
        s.apply_all(&g)?;
    }
    let mut data = StateVector::zero_state(n)?;
    data.apply_all(u)?;
    let expected = tensor(&data, &StateVector::basis_state(t, layers)?)?;
    Ok(overlap(&expected, &s)?.norm())
}
