use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix. Serializes as a list of rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix(pub DMatrix<C64>);

impl CMatrix {
    pub fn identity(dim: usize) -> Self {
        CMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        CMatrix(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.0.nrows() == self.0.ncols()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    /// max |(U†U − I)_ij|
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.0.ncols();
        let prod = self.0.adjoint() * &self.0;
        max_abs_diff(&prod, &DMatrix::identity(n, n))
    }

    /// max |(M − M†)_ij|
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.0, &self.0.adjoint())
    }

    /// Kronecker product with `self` on the high-order index.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        CMatrix(self.0.kronecker(&other.0))
    }
}

/// Haar-random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: rand::Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let mut gauss = || {
        let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let z = DMatrix::from_fn(dim, dim, |_, _| C64::new(gauss(), gauss()));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else if i == j {
            ONE
        } else {
            ZERO
        }
    });
    CMatrix(q * phases)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.0.nrows())
            .map(|i| {
                (0..self.0.ncols())
                    .map(|j| [self.0[(i, j)].re, self.0[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(CMatrix(DMatrix::from_fn(n, m, |i, j| {
            C64::new(rows[i][j][0], rows[i][j][1])
        })))
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]])
}

pub fn hadamard() -> CMatrix {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_rows(&[vec![h, h], vec![h, -h]])
}

/// exp(−iθX/2)
pub fn rx(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_rows(&[
        vec![C64::new(c, 0.0), C64::new(0.0, -s)],
        vec![C64::new(0.0, -s), C64::new(c, 0.0)],
    ])
}

/// exp(−iθY/2)
pub fn ry(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_rows(&[
        vec![C64::new(c, 0.0), C64::new(-s, 0.0)],
        vec![C64::new(s, 0.0), C64::new(c, 0.0)],
    ])
}

/// exp(−iθZ/2)
pub fn rz(theta: f64) -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::from_polar(1.0, -theta / 2.0), ZERO],
        vec![ZERO, C64::from_polar(1.0, theta / 2.0)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_round_trip_is_exact() {
        let m = rx(0.123456789);
        let text = serde_json::to_string(&m).unwrap();
        let back: CMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rotations_are_unitary() {
        for m in [rx(0.4), ry(1.3), rz(-2.2), hadamard(), pauli_y()] {
            assert!(m.unitarity_defect() < 1e-15);
        }
    }
}
