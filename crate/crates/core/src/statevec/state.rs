use std::fmt::Write as _;

use super::gate::GateOp;
use super::matrix::{C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest register the simulator accepts (2^24 complex doubles ≈ 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// Norm tolerance for states handed in from outside.
pub const NORM_TOL: f64 = 1e-10;

/// Pure n-qubit state. Qubit 0 is the most significant bit of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits requested, supported range is 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// |0…0⟩ on `n_qubits`.
pub fn zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero_state(n_qubits)
}

/// Returns U|ψ⟩ as a new state.
pub fn apply(gate: &GateOp, state: &StateVector) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_gate(gate)?;
    Ok(out)
}

/// ⟨a|b⟩
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::Shape(format!(
            "overlap of {}-qubit and {}-qubit states",
            a.n_qubits, b.n_qubits
        )));
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Kronecker product with `a` on the high-order qubits.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    check_capacity(a.n_qubits + b.n_qubits)?;
    let mut amps = Vec::with_capacity(a.amplitudes.len() * b.amplitudes.len());
    for x in &a.amplitudes {
        for y in &b.amplitudes {
            amps.push(x * y);
        }
    }
    Ok(StateVector {
        n_qubits: a.n_qubits + b.n_qubits,
        amplitudes: amps,
    })
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Index(format!(
                "basis index {index} on {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps explicit amplitudes; length must be a power of two and the norm 1.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!("{dim} amplitudes")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_capacity(n_qubits)?;
        let s = StateVector {
            n_qubits,
            amplitudes,
        };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm {norm}")));
        }
        Ok(s)
    }

    /// Unchecked constructor for intermediate (possibly unnormalized) vectors.
    pub(crate) fn from_parts(n_qubits: usize, amplitudes: Vec<C64>) -> Self {
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn bit(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - 1 - qubit)
    }

    /// Validates and applies a gate in place.
    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_masked(gate, 0, 0);
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[GateOp]) -> Result<()> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Applies `gate` only on basis indices `i` with `i & mask == value`.
    fn apply_masked(&mut self, gate: &GateOp, mask: usize, value: usize) {
        match gate {
            GateOp::Controlled {
                controls,
                pattern,
                body,
            } => {
                let mut m = mask;
                let mut v = value;
                for (&c, &p) in controls.iter().zip(pattern) {
                    let b = self.bit(c);
                    m |= b;
                    if p {
                        v |= b;
                    }
                }
                for g in body {
                    self.apply_masked(g, m, v);
                }
            }
            GateOp::Adder { targets, amount } => self.apply_adder(targets, *amount, mask, value),
            GateOp::Unitary { matrix, targets } if targets.len() == 2 => {
                let mut u = [ZERO; 16];
                for r in 0..4 {
                    for c in 0..4 {
                        u[4 * r + c] = matrix.0[(r, c)];
                    }
                }
                self.apply_two(&u, targets[0], targets[1], mask, value);
            }
            GateOp::Unitary { matrix, targets } if targets.len() > 2 => {
                self.apply_dense(&matrix.0, targets, mask, value)
            }
            other => {
                let u = other
                    .single_qubit_matrix()
                    .expect("remaining gate kinds act on one qubit");
                let target = other.support()[0];
                self.apply_one(&u, target, mask, value);
            }
        }
    }

    pub(crate) fn apply_one(&mut self, u: &[C64; 4], qubit: usize, mask: usize, value: usize) {
        let b = self.bit(qubit);
        for i in 0..self.amplitudes.len() {
            if i & b != 0 || i & mask != value {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | b];
            self.amplitudes[i] = u[0] * a0 + u[1] * a1;
            self.amplitudes[i | b] = u[2] * a0 + u[3] * a1;
        }
    }

    pub(crate) fn apply_two(&mut self, u: &[C64; 16], q0: usize, q1: usize, mask: usize, value: usize) {
        let b0 = self.bit(q0);
        let b1 = self.bit(q1);
        let both = b0 | b1;
        for i in 0..self.amplitudes.len() {
            if i & both != 0 || i & mask != value {
                continue;
            }
            let idx = [i, i | b1, i | b0, i | both];
            let a = [
                self.amplitudes[idx[0]],
                self.amplitudes[idx[1]],
                self.amplitudes[idx[2]],
                self.amplitudes[idx[3]],
            ];
            for r in 0..4 {
                self.amplitudes[idx[r]] =
                    u[4 * r] * a[0] + u[4 * r + 1] * a[1] + u[4 * r + 2] * a[2] + u[4 * r + 3] * a[3];
            }
        }
    }

    /// Local-index offsets for an ordered target list (first target = MSB).
    fn offsets(&self, targets: &[usize]) -> (Vec<usize>, usize) {
        let k = targets.len();
        let mut all = 0usize;
        let offs = (0..1usize << k)
            .map(|l| {
                let mut off = 0;
                for (j, &q) in targets.iter().enumerate() {
                    if l >> (k - 1 - j) & 1 == 1 {
                        off |= self.bit(q);
                    }
                }
                off
            })
            .collect();
        for &q in targets {
            all |= self.bit(q);
        }
        (offs, all)
    }

    fn apply_dense(
        &mut self,
        m: &nalgebra::DMatrix<C64>,
        targets: &[usize],
        mask: usize,
        value: usize,
    ) {
        let (offs, all) = self.offsets(targets);
        let d = offs.len();
        let mut buf = vec![ZERO; d];
        for i in 0..self.amplitudes.len() {
            if i & all != 0 || i & mask != value {
                continue;
            }
            for (l, off) in offs.iter().enumerate() {
                buf[l] = self.amplitudes[i | off];
            }
            for (r, off) in offs.iter().enumerate() {
                let mut acc = ZERO;
                for (c, b) in buf.iter().enumerate() {
                    acc += m[(r, c)] * b;
                }
                self.amplitudes[i | off] = acc;
            }
        }
    }

    /// Applies an arbitrary (not necessarily unitary) dense operator on
    /// `targets`. Used for observables.
    pub(crate) fn apply_operator_dense(&mut self, m: &nalgebra::DMatrix<C64>, targets: &[usize]) {
        self.apply_dense(m, targets, 0, 0);
    }

    fn apply_adder(&mut self, targets: &[usize], amount: u64, mask: usize, value: usize) {
        let t = targets.len();
        let modulus = 1u64 << t;
        let shift = amount % modulus;
        if shift == 0 {
            return;
        }
        let (offs, all) = self.offsets(targets);
        let old = self.amplitudes.clone();
        for i in 0..old.len() {
            if i & all != 0 || i & mask != value {
                continue;
            }
            for (b, off) in offs.iter().enumerate() {
                let nb = ((b as u64 + shift) % modulus) as usize;
                self.amplitudes[i | offs[nb]] = old[i | off];
            }
        }
    }

    /// Text dump: one `index<TAB>re<TAB>im` line per amplitude, 17
    /// significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{:.16e}\t{:.16e}", a.re, a.im);
        }
        out
    }

    /// Parses the output of [`StateVector::dump`].
    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut amps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Validation(format!("line {}: {e}", lineno + 1)))
            };
            if fields.len() != 3 {
                return Err(Error::Validation(format!(
                    "line {}: expected 3 fields",
                    lineno + 1
                )));
            }
            let idx: usize = fields[0]
                .parse()
                .map_err(|e| Error::Validation(format!("line {}: {e}", lineno + 1)))?;
            if idx != amps.len() {
                return Err(Error::Validation(format!(
                    "line {}: index {idx} out of order",
                    lineno + 1
                )));
            }
            amps.push(C64::new(parse(fields[1])?, parse(fields[2])?));
        }
        Self::from_amplitudes(amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_state_examples() {
        assert_eq!(zero_state(1).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(zero_state(2).unwrap().amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        assert!(matches!(zero_state(25), Err(Error::Capacity(_))));
        assert!(matches!(zero_state(0), Err(Error::Capacity(_))));
    }

    #[test]
    fn pauli_x_and_hadamard_on_zero() {
        let s = zero_state(1).unwrap();
        let x = apply(&GateOp::PauliX { target: 0 }, &s).unwrap();
        assert_eq!(x.amplitudes(), &[ZERO, ONE]);
        let h = apply(&GateOp::Hadamard { target: 0 }, &s).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(h.amplitudes()[0].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(h.amplitudes()[1].re, r, epsilon = 1e-15);
    }

    #[test]
    fn rotation_x_matches_matrix_exponential_oracle() {
        // exp(−iθX/2) by truncated power series, independent of the closed form.
        let theta: f64 = 0.7;
        let mut term = [[ONE, ZERO], [ZERO, ONE]];
        let mut sum = term;
        let gen = C64::new(0.0, -theta / 2.0);
        for k in 1..40 {
            // term ← term · (−iθ/2 X) / k
            let next = [
                [term[0][1] * gen, term[0][0] * gen],
                [term[1][1] * gen, term[1][0] * gen],
            ];
            term = [
                [next[0][0] / k as f64, next[0][1] / k as f64],
                [next[1][0] / k as f64, next[1][1] / k as f64],
            ];
            for r in 0..2 {
                for c in 0..2 {
                    sum[r][c] += term[r][c];
                }
            }
        }
        let s = apply(&GateOp::RotationX { angle: theta, target: 0 }, &zero_state(1).unwrap()).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, sum[0][0].re, epsilon = 1e-14);
        assert_abs_diff_eq!(s.amplitudes()[1].im, sum[1][0].im, epsilon = 1e-14);
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.35f64.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.amplitudes()[1].im, -(0.35f64.sin()), epsilon = 1e-14);
    }

    #[test]
    fn overlap_examples() {
        let z = zero_state(1).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        let plus = apply(&GateOp::Hadamard { target: 0 }, &z).unwrap();
        assert_eq!(overlap(&z, &z).unwrap(), ONE);
        assert_eq!(overlap(&z, &one).unwrap(), ZERO);
        assert_abs_diff_eq!(
            overlap(&plus, &z).unwrap().re,
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert!(matches!(
            overlap(&z, &zero_state(2).unwrap()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn tensor_examples() {
        let z = zero_state(1).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        assert_eq!(tensor(&z, &one).unwrap(), StateVector::basis_state(2, 1).unwrap());
        let plus = apply(&GateOp::Hadamard { target: 0 }, &z).unwrap();
        let t = tensor(&plus, &z).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(t.amplitudes()[0b00].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(t.amplitudes()[0b10].re, r, epsilon = 1e-15);
        let big = zero_state(13).unwrap();
        assert!(matches!(tensor(&big, &big), Err(Error::Capacity(_))));
    }

    #[test]
    fn adder_shifts_basis_states() {
        let g = GateOp::Adder {
            targets: vec![0, 1],
            amount: 1,
        };
        for (b, expected) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            let s = apply(&g, &StateVector::basis_state(2, b).unwrap()).unwrap();
            assert_eq!(s, StateVector::basis_state(2, expected).unwrap());
        }
    }

    #[test]
    fn dump_round_trip() {
        let s = apply(
            &GateOp::RotationY { angle: 0.3, target: 1 },
            &apply(&GateOp::Hadamard { target: 0 }, &zero_state(2).unwrap()).unwrap(),
        )
        .unwrap();
        let text = s.dump();
        assert!(text.starts_with("0\t"));
        assert_eq!(StateVector::parse_dump(&text).unwrap(), s);
    }
}
