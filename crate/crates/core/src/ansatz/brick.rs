use crate::statevec::matrix::{self, CMatrix, C64, I, ONE};
use crate::statevec::GateOp;

/// Angles per two-qubit brick.
pub const BRICK_PARAMS: usize = 15;

/// RZ(α)·RY(β)·RZ(γ).
pub fn euler_zyz(alpha: f64, beta: f64, gamma: f64) -> CMatrix {
    CMatrix(matrix::rz(alpha).0 * matrix::ry(beta).0 * matrix::rz(gamma).0)
}

/// exp(i(a·XX + b·YY + c·ZZ)).
pub fn interaction(a: f64, b: f64, c: f64) -> CMatrix {
    let x = matrix::pauli_x();
    let y = matrix::pauli_y();
    let z = matrix::pauli_z();
    let exp_pp = |theta: f64, p: &CMatrix| {
        let pp = p.kron(p).0;
        CMatrix(CMatrix::identity(4).0 * C64::new(theta.cos(), 0.0) + pp * (I * theta.sin()))
    };
    CMatrix(exp_pp(a, &x).0 * exp_pp(b, &y).0 * exp_pp(c, &z).0)
}

/// The 4×4 unitary of a brick on (q_a, q_b), q_a most significant:
/// (E(a[9..12]) ⊗ E(a[12..15])) · exp(i(a[6]XX + a[7]YY + a[8]ZZ)) · (E(a[0..3]) ⊗ E(a[3..6])).
/// All-zero angles give the identity.
pub fn brick_matrix(angles: &[f64]) -> CMatrix {
    assert_eq!(angles.len(), BRICK_PARAMS, "brick needs 15 angles");
    let e = |k: usize| euler_zyz(angles[k], angles[k + 1], angles[k + 2]);
    let before = e(0).kron(&e(3));
    let after = e(9).kron(&e(12));
    let mid = interaction(angles[6], angles[7], angles[8]);
    CMatrix(after.0 * mid.0 * before.0)
}

/// Brick as a dense gate on `(q_a, q_b)`.
pub fn brick_gate(angles: &[f64], q_a: usize, q_b: usize) -> GateOp {
    GateOp::unitary(brick_matrix(angles), vec![q_a, q_b])
}

/// Angles that realize the identity.
pub fn identity_angles() -> [f64; BRICK_PARAMS] {
    [0.0; BRICK_PARAMS]
}

/// Max elementwise distance between `a` and `b` after removing the best
/// global phase.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let inner: C64 = a.0.iter().zip(b.0.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { ONE };
    a.0.iter()
        .zip(b.0.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}
