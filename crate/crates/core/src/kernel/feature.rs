use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hardfn::{dlp_feature_state, DlpInstance};
use crate::lcu::prepare_state;
use crate::statevec::{overlap, GateOp, StateVector};

/// x ↦ |φ(x)⟩ on a fixed register.
pub trait FeatureMap: Send + Sync {
    fn id(&self) -> String;

    fn n_qubits(&self) -> usize;

    fn state(&self, x: u64) -> Result<StateVector>;

    /// k(x, x′) = |⟨φ(x)|φ(x′)⟩|².
    fn kernel(&self, a: u64, b: u64) -> Result<f64> {
        Ok(overlap(&self.state(a)?, &self.state(b)?)?.norm_sqr())
    }

    /// Gates on qubits 0..n_qubits preparing |φ(x)⟩ from |0…0⟩ up to a
    /// global phase.
    fn circuit(&self, x: u64) -> Result<Vec<GateOp>> {
        let s = self.state(x)?;
        let qubits: Vec<usize> = (0..self.n_qubits()).collect();
        prepare_state(s.amplitudes(), &qubits, !self.is_real())
    }

    /// Whether every feature state has real non-negative amplitudes.
    fn is_real(&self) -> bool {
        false
    }
}

/// Coset-window superpositions over a toy discrete-log group.
#[derive(Clone, Debug)]
pub struct DlpFeatureMap {
    pub instance: Arc<DlpInstance>,
    pub k_window: u32,
}

impl FeatureMap for DlpFeatureMap {
    fn id(&self) -> String {
        format!(
            "dlp(p={},g={},k={})",
            self.instance.p(),
            self.instance.g(),
            self.k_window
        )
    }

    fn n_qubits(&self) -> usize {
        self.instance.n_bits()
    }

    fn state(&self, x: u64) -> Result<StateVector> {
        dlp_feature_state(&self.instance, self.k_window, x)
    }

    fn is_real(&self) -> bool {
        true
    }
}

/// x ↦ |x⟩.
#[derive(Clone, Debug)]
pub struct BasisFeatureMap {
    pub n_qubits: usize,
}

impl FeatureMap for BasisFeatureMap {
    fn id(&self) -> String {
        format!("basis({})", self.n_qubits)
    }

    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn state(&self, x: u64) -> Result<StateVector> {
        if self.n_qubits < 64 && x >> self.n_qubits != 0 {
            return Err(Error::Domain(format!("{x} needs more than {} bits", self.n_qubits)));
        }
        StateVector::basis_state(self.n_qubits, x as usize)
    }

    fn circuit(&self, x: u64) -> Result<Vec<GateOp>> {
        self.state(x)?;
        Ok((0..self.n_qubits)
            .filter(|q| x >> (self.n_qubits - 1 - q) & 1 == 1)
            .map(|q| GateOp::PauliX { target: q })
            .collect())
    }

    fn is_real(&self) -> bool {
        true
    }
}

/// Explicit per-input preparation circuits.
#[derive(Clone, Debug)]
pub struct CircuitFeatureMap {
    pub name: String,
    pub n_qubits: usize,
    pub circuits: Vec<(u64, Vec<GateOp>)>,
}

impl FeatureMap for CircuitFeatureMap {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn state(&self, x: u64) -> Result<StateVector> {
        let mut s = StateVector::zero_state(self.n_qubits)?;
        s.apply_all(&self.circuit(x)?)?;
        Ok(s)
    }

    fn circuit(&self, x: u64) -> Result<Vec<GateOp>> {
        self.circuits
            .iter()
            .find(|(k, _)| *k == x)
            .map(|(_, c)| c.clone())
            .ok_or_else(|| Error::Domain(format!("no feature circuit for input {x}")))
    }
}
