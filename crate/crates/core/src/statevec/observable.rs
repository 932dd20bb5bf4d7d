use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, C64, I, ZERO};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Dense Hermitian observables are limited to this many qubits.
pub const MAX_DENSE_QUBITS: usize = 12;

const HERMITIAN_TOL: f64 = 1e-12;
const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// A real-weighted Pauli word. `word[q]` is the Pauli acting on qubit `q`,
/// one of `I X Y Z`; its length must equal the register size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub word: String,
}

/// Hermitian measurement operator on a register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Observable {
    PauliSum {
        terms: Vec<PauliTerm>,
    },
    /// Dense Hermitian matrix on `qubits` (first listed = most significant).
    Dense {
        matrix: CMatrix,
        qubits: Vec<usize>,
    },
    /// |0…0⟩⟨0…0| on `qubits`.
    ZeroProjector {
        qubits: Vec<usize>,
    },
    /// Real diagonal operator on `qubits`, indexed by their local basis value.
    Diagonal {
        qubits: Vec<usize>,
        values: Vec<f64>,
    },
    /// Product of two observables on disjoint qubit sets.
    Tensor {
        left: Box<Observable>,
        right: Box<Observable>,
    },
}

impl Observable {
    /// Single Pauli Z on `qubit` of an `n_qubits` register.
    pub fn z(qubit: usize, n_qubits: usize) -> Self {
        Self::pauli_word(1.0, &Self::word_with(n_qubits, &[(qubit, 'Z')]))
    }

    /// Z on every qubit.
    pub fn z_all(n_qubits: usize) -> Self {
        Self::pauli_word(1.0, &"Z".repeat(n_qubits))
    }

    pub fn pauli_word(coefficient: f64, word: &str) -> Self {
        Observable::PauliSum {
            terms: vec![PauliTerm {
                coefficient,
                word: word.to_string(),
            }],
        }
    }

    pub fn word_with(n_qubits: usize, ops: &[(usize, char)]) -> String {
        let mut w = vec!['I'; n_qubits];
        for &(q, p) in ops {
            w[q] = p;
        }
        w.into_iter().collect()
    }

    pub fn tensor(left: Observable, right: Observable) -> Self {
        Observable::Tensor {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Qubits the observable acts on non-trivially (for Pauli sums: every
    /// position with a non-identity letter in some term).
    pub fn support(&self) -> Vec<usize> {
        let mut out: Vec<usize> = match self {
            Observable::PauliSum { terms } => terms
                .iter()
                .flat_map(|t| {
                    t.word
                        .chars()
                        .enumerate()
                        .filter(|(_, c)| *c != 'I')
                        .map(|(q, _)| q)
                        .collect::<Vec<_>>()
                })
                .collect(),
            Observable::Dense { qubits, .. }
            | Observable::ZeroProjector { qubits }
            | Observable::Diagonal { qubits, .. } => qubits.clone(),
            Observable::Tensor { left, right } => {
                let mut v = left.support();
                v.extend(right.support());
                v
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Structural checks against an `n_qubits` register.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let in_range = |qs: &[usize]| -> Result<()> {
            for (i, &q) in qs.iter().enumerate() {
                if q >= n_qubits {
                    return Err(Error::Shape(format!(
                        "observable on qubit {q} of a {n_qubits}-qubit register"
                    )));
                }
                if qs[i + 1..].contains(&q) {
                    return Err(Error::Shape(format!("repeated observable qubit {q}")));
                }
            }
            Ok(())
        };
        match self {
            Observable::PauliSum { terms } => {
                for t in terms {
                    if t.word.chars().count() != n_qubits {
                        return Err(Error::Shape(format!(
                            "Pauli word {:?} on a {n_qubits}-qubit register",
                            t.word
                        )));
                    }
                    if let Some(c) = t.word.chars().find(|c| !"IXYZ".contains(*c)) {
                        return Err(Error::Validation(format!("unknown Pauli letter {c:?}")));
                    }
                    if !t.coefficient.is_finite() {
                        return Err(Error::Validation("non-finite Pauli coefficient".into()));
                    }
                }
                Ok(())
            }
            Observable::Dense { matrix, qubits } => {
                in_range(qubits)?;
                if qubits.len() > MAX_DENSE_QUBITS {
                    return Err(Error::Capacity(format!(
                        "dense observable on {} qubits (max {MAX_DENSE_QUBITS})",
                        qubits.len()
                    )));
                }
                if !matrix.is_square() || matrix.dim() != 1 << qubits.len() {
                    return Err(Error::Shape(format!(
                        "{}-dim matrix on {} qubits",
                        matrix.dim(),
                        qubits.len()
                    )));
                }
                let defect = matrix.hermiticity_defect();
                if defect > HERMITIAN_TOL {
                    return Err(Error::Validation(format!(
                        "observable is not Hermitian (defect {defect:.3e})"
                    )));
                }
                Ok(())
            }
            Observable::ZeroProjector { qubits } => in_range(qubits),
            Observable::Diagonal { qubits, values } => {
                in_range(qubits)?;
                if values.len() != 1 << qubits.len() {
                    return Err(Error::Shape(format!(
                        "{} diagonal values for {} qubits",
                        values.len(),
                        qubits.len()
                    )));
                }
                Ok(())
            }
            Observable::Tensor { left, right } => {
                left.validate(n_qubits)?;
                right.validate(n_qubits)?;
                let l = left.support();
                if let Some(q) = right.support().iter().find(|q| l.contains(q)) {
                    return Err(Error::Shape(format!(
                        "tensor factors overlap on qubit {q}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// M|ψ⟩ (unnormalized).
    pub fn apply_to(&self, state: &StateVector) -> Result<Vec<C64>> {
        self.validate(state.n_qubits())?;
        Ok(self.apply_unchecked(state))
    }

    fn apply_unchecked(&self, state: &StateVector) -> Vec<C64> {
        let n = state.n_qubits();
        let amps = state.amplitudes();
        match self {
            Observable::PauliSum { terms } => {
                let mut out = vec![ZERO; amps.len()];
                for t in terms {
                    let mut flip = 0usize;
                    let mut zmask = 0usize;
                    let mut n_y = 0u32;
                    for (q, c) in t.word.chars().enumerate() {
                        let b = 1usize << (n - 1 - q);
                        match c {
                            'X' => flip |= b,
                            'Y' => {
                                flip |= b;
                                zmask |= b;
                                n_y += 1;
                            }
                            'Z' => zmask |= b,
                            _ => {}
                        }
                    }
                    // Y = i·X·Z, so P|i⟩ = i^{n_y} (−1)^{popcount(i & zmask)} |i ⊕ flip⟩.
                    let iy = I.powu(n_y);
                    for (i, a) in amps.iter().enumerate() {
                        let sign = if (i & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                        out[i ^ flip] += iy * a * (sign * t.coefficient);
                    }
                }
                out
            }
            Observable::Dense { matrix, qubits } => {
                let mut s = state.clone();
                s.apply_operator_dense(&matrix.0, qubits);
                s.into_amplitudes()
            }
            Observable::ZeroProjector { qubits } => {
                let mask = qubits.iter().fold(0usize, |m, &q| m | state.bit(q));
                amps.iter()
                    .enumerate()
                    .map(|(i, a)| if i & mask == 0 { *a } else { ZERO })
                    .collect()
            }
            Observable::Diagonal { qubits, values } => {
                let k = qubits.len();
                amps.iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let mut local = 0usize;
                        for (j, &q) in qubits.iter().enumerate() {
                            if i & state.bit(q) != 0 {
                                local |= 1 << (k - 1 - j);
                            }
                        }
                        a * values[local]
                    })
                    .collect()
            }
            Observable::Tensor { left, right } => {
                let inner = right.apply_unchecked(state);
                let tmp = StateVector::from_parts(n, inner);
                left.apply_unchecked(&tmp)
            }
        }
    }

    /// ⟨ψ|M|ψ⟩. The imaginary residue is checked and discarded.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        let m_psi = self.apply_to(state)?;
        let value: C64 = state
            .amplitudes()
            .iter()
            .zip(&m_psi)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let scale = self.coefficient_scale().max(1.0);
        if value.im.abs() > IMAG_RESIDUE_TOL * scale {
            return Err(Error::Validation(format!(
                "expectation has imaginary residue {:.3e}",
                value.im
            )));
        }
        Ok(value.re)
    }

    fn coefficient_scale(&self) -> f64 {
        match self {
            Observable::PauliSum { terms } => terms.iter().map(|t| t.coefficient.abs()).sum(),
            Observable::Dense { matrix, .. } => matrix.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
                * matrix.dim() as f64,
            Observable::ZeroProjector { .. } => 1.0,
            Observable::Diagonal { values, .. } => values.iter().map(|v| v.abs()).fold(0.0, f64::max),
            Observable::Tensor { left, right } => left.coefficient_scale() * right.coefficient_scale(),
        }
    }

    /// Dense 2^n × 2^n matrix of the observable.
    pub fn to_dense(&self, n_qubits: usize) -> Result<CMatrix> {
        self.validate(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut out = CMatrix::identity(dim);
        for col in 0..dim {
            let basis = StateVector::basis_state(n_qubits, col)?;
            for (row, v) in self.apply_unchecked(&basis).into_iter().enumerate() {
                out.0[(row, col)] = v;
            }
        }
        Ok(out)
    }
}

/// Free-function form of [`Observable::expectation`].
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    obs.expectation(state)
}
