use nalgebra::{DMatrix, Matrix4, Vector4};
use rand::Rng;

use crate::ansatz::{brick_matrix, phase_distance, BRICK_PARAMS};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_CASES};
use crate::statevec::matrix::{CMatrix, C64, I, ONE, ZERO};

/// Reconstruction tolerance (up to global phase).
pub const KAK_TOL: f64 = 1e-10;

fn magic() -> DMatrix<C64> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rows = [
        [ONE, I, ZERO, ZERO],
        [ZERO, ZERO, I, ONE],
        [ZERO, ZERO, I, -ONE],
        [ONE, -I, ZERO, ZERO],
    ];
    DMatrix::from_fn(4, 4, |r, c| rows[r][c] * h)
}

/// Real diagonal of B†·(P⊗P)·B in the magic basis.
fn magic_diagonal(p: &CMatrix) -> [f64; 4] {
    let b = magic();
    let d = b.adjoint() * p.kron(p).0 * &b;
    [d[(0, 0)].re, d[(1, 1)].re, d[(2, 2)].re, d[(3, 3)].re]
}

/// Splits a 4×4 matrix known to be a Kronecker product into 2×2 factors.
fn kron_factor(m: &DMatrix<C64>) -> (CMatrix, CMatrix) {
    let block = |i: usize, j: usize| m.view((2 * i, 2 * j), (2, 2)).into_owned();
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n = block(i, j).norm();
            if n > best {
                (bi, bj, best) = (i, j, n);
            }
        }
    }
    let b = block(bi, bj);
    let c = &b / b.determinant().sqrt();
    let a = DMatrix::from_fn(2, 2, |i, j| (c.adjoint() * block(i, j)).trace() / 2.0);
    (CMatrix(a), CMatrix(c))
}

/// (α, β, γ) with V ∝ RZ(α)·RY(β)·RZ(γ).
pub fn zyz_angles(v: &CMatrix) -> [f64; 3] {
    let w = &v.0 / v.0.determinant().sqrt();
    let (c, s) = (w[(0, 0)].norm(), w[(1, 0)].norm());
    let beta = 2.0 * s.atan2(c);
    let (sum, diff) = if s <= 1e-12 {
        (2.0 * w[(1, 1)].arg(), 0.0)
    } else if c <= 1e-12 {
        (0.0, 2.0 * w[(1, 0)].arg())
    } else {
        (2.0 * w[(1, 1)].arg(), 2.0 * w[(1, 0)].arg())
    };
    [(sum + diff) / 2.0, beta, (sum - diff) / 2.0]
}

/// Real orthogonal P with Pᵀ·M·P diagonal, for complex symmetric unitary M.
fn simultaneous_diagonalizer(m: &DMatrix<C64>) -> Result<DMatrix<f64>> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    for attempt in 0..32u64 {
        let mut rng = stream_rng(0, STREAM_CASES, &[attempt]);
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mix = Matrix4::from_fn(|r, c| a * re[(r, c)] + b * im[(r, c)]);
        let p = mix.symmetric_eigen().eigenvectors;
        let p = DMatrix::from_fn(4, 4, |r, c| p[(r, c)]);
        let pc = p.map(|x| C64::new(x, 0.0));
        let d = pc.transpose() * m * &pc;
        let off = (0..4)
            .flat_map(|r| (0..4).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| d[(r, c)].norm())
            .fold(0.0, f64::max);
        if off <= 1e-13 {
            return Ok(p);
        }
    }
    Err(Error::Decomposition("could not diagonalize the magic-basis product".into()))
}

/// Fifteen brick angles whose brick equals `u` up to a global phase.
pub fn brick_angles(u: &CMatrix) -> Result<[f64; BRICK_PARAMS]> {
    if u.dim() != 4 || u.unitarity_defect() > 1e-9 {
        return Err(Error::Decomposition("input is not a 4×4 unitary".into()));
    }
    let det = u.0.determinant();
    let su = &u.0 * C64::from_polar(1.0, -det.arg() / 4.0);
    let b = magic();
    let up = b.adjoint() * &su * &b;
    let m = up.transpose() * &up;
    let mut p = simultaneous_diagonalizer(&m)?;
    if p.determinant() < 0.0 {
        p.column_mut(0).neg_mut();
    }
    let pc = p.map(|x| C64::new(x, 0.0));
    let d = pc.transpose() * &m * &pc;
    let mut theta: Vec<f64> = (0..4).map(|k| d[(k, k)].arg() / 2.0).collect();
    if theta.iter().sum::<f64>().cos() < 0.0 {
        theta[0] += std::f64::consts::PI;
    }
    let inv_phase = DMatrix::from_fn(4, 4, |r, c| {
        if r == c {
            C64::from_polar(1.0, -theta[r])
        } else {
            ZERO
        }
    });
    let k1 = &up * &pc * inv_phase;
    let left = &b * k1 * b.adjoint();
    let right = &b * pc.transpose() * b.adjoint();

    let (lx, ly, lz) = (
        magic_diagonal(&crate::statevec::matrix::pauli_x()),
        magic_diagonal(&crate::statevec::matrix::pauli_y()),
        magic_diagonal(&crate::statevec::matrix::pauli_z()),
    );
    let sys = Matrix4::from_fn(|r, c| match c {
        0 => 1.0,
        1 => lx[r],
        2 => ly[r],
        _ => lz[r],
    });
    let coef = sys
        .lu()
        .solve(&Vector4::new(theta[0], theta[1], theta[2], theta[3]))
        .ok_or_else(|| Error::Decomposition("singular interaction system".into()))?;

    let (after_a, after_b) = kron_factor(&left);
    let (before_a, before_b) = kron_factor(&right);
    let mut angles = [0.0; BRICK_PARAMS];
    angles[0..3].copy_from_slice(&zyz_angles(&before_a));
    angles[3..6].copy_from_slice(&zyz_angles(&before_b));
    angles[6..9].copy_from_slice(&[coef[1], coef[2], coef[3]]);
    angles[9..12].copy_from_slice(&zyz_angles(&after_a));
    angles[12..15].copy_from_slice(&zyz_angles(&after_b));
    let err = phase_distance(&brick_matrix(&angles), u);
    if !(err <= KAK_TOL) {
        return Err(Error::Decomposition(format!(
            "brick reconstruction error {err:.3e}"
        )));
    }
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::euler_zyz;
    use crate::statevec::GateOp;
    use proptest::prelude::*;

    #[test]
    fn zyz_round_trip() {
        for (a, b, c) in [(0.3, 1.2, -0.7), (0.0, 0.0, 0.9), (1.0, std::f64::consts::PI, 0.2)] {
            let v = euler_zyz(a, b, c);
            let [x, y, z] = zyz_angles(&v);
            assert!(phase_distance(&euler_zyz(x, y, z), &v) < 1e-12);
        }
    }

    #[test]
    fn cnot_and_swap_invert() {
        for g in [GateOp::cnot(0, 1), GateOp::swap(0, 1)] {
            let m = g.matrix().unwrap();
            let angles = brick_angles(&m).unwrap();
            assert!(phase_distance(&brick_matrix(&angles), &m) < KAK_TOL);
        }
    }

    #[test]
    fn identity_and_local_gates_invert() {
        let id = CMatrix::identity(4);
        brick_angles(&id).unwrap();
        let local = euler_zyz(0.4, 0.2, 1.0).kron(&euler_zyz(-1.0, 2.0, 0.1));
        brick_angles(&local).unwrap();
    }

    #[test]
    fn rejects_non_unitary() {
        let mut m = CMatrix::identity(4);
        m.0[(0, 0)] = C64::new(2.0, 0.0);
        assert!(brick_angles(&m).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_bricks_invert(angles in proptest::collection::vec(-4.0f64..4.0, 15)) {
            let m = brick_matrix(&angles);
            let back = brick_angles(&m).unwrap();
            prop_assert!(phase_distance(&brick_matrix(&back), &m) < KAK_TOL);
        }
    }
}
