//! Planted labelling functions Q(x): classical evaluators, their circuit
//! realizations U(x), and toy discrete-logarithm instances.
//!
//! Encoding convention: the circuit realizes ⟨Z on data qubit 0⟩ = y(x) =
//! 2·Q(x) − 1, i.e. the flip X is applied exactly when Q(x) = 0.

mod dlp;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use dlp::{brute_force_dlog, dlp_feature_state, mod_pow, DlpInstance, MAX_PRIME};

use crate::error::{Error, Result};
use crate::statevec::GateOp;

/// Serializable name of a built-in planted function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantedFunctionId {
    Parity { n_bits: usize },
    DlpMsb { p: u64, g: u64 },
}

#[derive(Clone, Debug)]
enum Kind {
    Parity,
    DlpMsb(Arc<DlpInstance>),
}

/// A Boolean function on n-bit inputs together with its data domain and a
/// unitary realization on n data qubits.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "PlantedFunctionId", try_from = "PlantedFunctionId")]
pub struct PlantedFunction {
    n_bits: usize,
    kind: Kind,
}

impl PartialEq for PlantedFunction {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

impl From<PlantedFunction> for PlantedFunctionId {
    fn from(f: PlantedFunction) -> Self {
        f.id()
    }
}

impl TryFrom<PlantedFunctionId> for PlantedFunction {
    type Error = Error;

    fn try_from(id: PlantedFunctionId) -> Result<Self> {
        match id {
            PlantedFunctionId::Parity { n_bits } => parity_fn(n_bits),
            PlantedFunctionId::DlpMsb { p, g } => Ok(dlp_msb(&Arc::new(DlpInstance::new(p, g)?))),
        }
    }
}

/// Q(x) = XOR of the bits of x.
pub fn parity_fn(n_bits: usize) -> Result<PlantedFunction> {
    if n_bits == 0 || n_bits > 63 {
        return Err(Error::Validation(format!("parity on {n_bits} bits")));
    }
    Ok(PlantedFunction {
        n_bits,
        kind: Kind::Parity,
    })
}

/// Q(x) = 1 iff log_g(x) ≥ (p − 1)/2, over the multiplicative group mod p.
pub fn dlp_msb(inst: &Arc<DlpInstance>) -> PlantedFunction {
    PlantedFunction {
        n_bits: inst.n_bits(),
        kind: Kind::DlpMsb(Arc::clone(inst)),
    }
}

impl PlantedFunction {
    pub fn id(&self) -> PlantedFunctionId {
        match &self.kind {
            Kind::Parity => PlantedFunctionId::Parity {
                n_bits: self.n_bits,
            },
            Kind::DlpMsb(inst) => PlantedFunctionId::DlpMsb {
                p: inst.p(),
                g: inst.g(),
            },
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Parity => format!("parity{}", self.n_bits),
            Kind::DlpMsb(inst) => format!("dlp_msb(p={},g={})", inst.p(), inst.g()),
        }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn dlp_instance(&self) -> Option<&Arc<DlpInstance>> {
        match &self.kind {
            Kind::DlpMsb(inst) => Some(inst),
            Kind::Parity => None,
        }
    }

    pub fn in_domain(&self, x: u64) -> bool {
        match &self.kind {
            Kind::Parity => self.n_bits >= 64 || x >> self.n_bits == 0,
            Kind::DlpMsb(inst) => inst.contains(x),
        }
    }

    /// Q(x) ∈ {0, 1}.
    pub fn eval(&self, x: u64) -> Result<u8> {
        if !self.in_domain(x) {
            return Err(Error::Domain(format!("{x} outside the domain of {}", self.name())));
        }
        Ok(match &self.kind {
            Kind::Parity => (x.count_ones() % 2) as u8,
            Kind::DlpMsb(inst) => u8::from(2 * inst.log(x)? >= inst.order()),
        })
    }

    /// y(x) = 2·Q(x) − 1 ∈ {−1, +1}.
    pub fn label(&self, x: u64) -> Result<f64> {
        Ok(if self.eval(x)? == 1 { 1.0 } else { -1.0 })
    }

    /// U(x) on local data qubits 0..n: X on qubit 0 iff Q(x) = 0, so that
    /// ⟨Z₀⟩ = y(x) from |0…0⟩.
    pub fn circuit(&self, x: u64) -> Result<Vec<GateOp>> {
        Ok(if self.eval(x)? == 0 {
            vec![GateOp::PauliX { target: 0 }]
        } else {
            Vec::new()
        })
    }

    /// Every input of the domain, ascending.
    pub fn domain(&self) -> Vec<u64> {
        match &self.kind {
            Kind::Parity => (0..1u64 << self.n_bits.min(24)).collect(),
            Kind::DlpMsb(inst) => (1..inst.p()).collect(),
        }
    }
}

/// `x_bits,label` rows (MSB first) for a labelled sample.
pub fn dataset_csv(n_bits: usize, rows: &[(u64, f64)]) -> String {
    let mut out = String::from("x_bits,label\n");
    for (x, y) in rows {
        out.push_str(&format!("{},{}\n", bit_string(*x, n_bits), *y as i64));
    }
    out
}

pub fn bit_string(x: u64, n_bits: usize) -> String {
    (0..n_bits)
        .map(|i| if x >> (n_bits - 1 - i) & 1 == 1 { '1' } else { '0' })
        .collect()
}
