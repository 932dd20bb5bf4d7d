use serde::{Deserialize, Serialize};

use super::brickwork::{Role, Segment};
use super::synthesis::{preparation_ucrs, Ucr};
use crate::error::{Error, Result};
use crate::kernel::{FeatureMap, KernelModel};
use crate::statevec::{inverse_circuit, GateOp, Observable, StateVector, C64, MAX_QUBITS};

/// Σ_i α_i k(x, x_i) as an ancilla-controlled circuit: expectation of
/// `measurement` times `scale` reproduces the kernel model.
///
/// Ancilla qubits come first (qubit 0 most significant), then the work
/// register of the feature map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcuCircuit {
    pub ancilla_qubits: usize,
    pub work_qubits: usize,
    /// β_i = sqrt(|α_i| / ‖α‖₁), padded with zeros to 2^ancilla_qubits.
    pub beta: Vec<f64>,
    /// sign(α_i), zero α_i mapped to +1.
    pub signs: Vec<f64>,
    pub scale: f64,
    pub prep: Vec<GateOp>,
    /// (ancilla pattern i, V(x_i) on the work register). Zero weights omitted.
    pub controlled_blocks: Vec<(usize, Vec<GateOp>)>,
    pub measurement: Observable,
    /// Phase rotations in the feature preparations.
    pub with_phases: bool,
    /// Rotation levels of the merged inverse preparations, controlled on the
    /// ancilla register and the work prefix.
    select: Vec<Ucr>,
}

fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// Compiles a fitted kernel model against the feature map it was fitted with.
pub fn compile_lcu(model: &KernelModel, fm: &dyn FeatureMap) -> Result<LcuCircuit> {
    let n = model.alpha.len();
    if n == 0 || model.support.len() != n {
        return Err(Error::Shape(format!(
            "{} weights for {} support points",
            n,
            model.support.len()
        )));
    }
    let l1: f64 = model.alpha.iter().map(|a| a.abs()).sum();
    if !(l1 > 0.0) || !l1.is_finite() {
        return Err(Error::DegenerateModel("all kernel weights are zero".into()));
    }
    let a = if n == 1 { 0 } else { ceil_log2(n) };
    let m = fm.n_qubits();
    if a + m > MAX_QUBITS {
        return Err(Error::Capacity(format!("{a} ancilla plus {m} work qubits")));
    }
    let dim = 1usize << a;
    let mut beta = vec![0.0; dim];
    let mut signs = vec![1.0; dim];
    for (i, al) in model.alpha.iter().enumerate() {
        beta[i] = (al.abs() / l1).sqrt();
        if *al < 0.0 {
            signs[i] = -1.0;
        }
    }
    let ancilla: Vec<usize> = (0..a).collect();
    let work: Vec<usize> = (a..a + m).collect();
    let amps: Vec<C64> = beta.iter().map(|b| C64::new(*b, 0.0)).collect();
    let prep = super::prepare_state(&amps, &ancilla, false)?;
    let with_phases = !fm.is_real();

    let mut controlled_blocks = Vec::new();
    let mut per_branch: Vec<Option<Vec<Ucr>>> = vec![None; dim];
    for (i, (&al, &xi)) in model.alpha.iter().zip(&model.support).enumerate() {
        if al == 0.0 {
            continue;
        }
        let v: Vec<GateOp> = fm.circuit(xi)?.iter().map(|g| g.relabel(&work)).collect();
        controlled_blocks.push((i, v));
        let s = fm.state(xi)?;
        per_branch[i] = Some(preparation_ucrs(s.amplitudes(), &work, with_phases)?);
    }
    let template = preparation_ucrs(&vec![C64::new(1.0, 0.0); 1 << m], &work, with_phases)?;
    let mut select = Vec::with_capacity(template.len());
    for (level, t) in template.iter().enumerate().rev() {
        let k = t.controls.len();
        let mut angles = vec![0.0; dim << k];
        for (i, branch) in per_branch.iter().enumerate() {
            if let Some(ucrs) = branch {
                for (prefix, ang) in ucrs[level].angles.iter().enumerate() {
                    angles[(i << k) + prefix] = -ang;
                }
            }
        }
        select.push(Ucr {
            axis: t.axis,
            controls: ancilla.iter().chain(&t.controls).copied().collect(),
            target: t.target,
            angles,
        });
    }
    let measurement = Observable::tensor(
        Observable::Diagonal {
            qubits: ancilla,
            values: signs.clone(),
        },
        Observable::ZeroProjector { qubits: work },
    );
    Ok(LcuCircuit {
        ancilla_qubits: a,
        work_qubits: m,
        beta,
        signs,
        scale: l1,
        prep,
        controlled_blocks,
        measurement,
        with_phases,
        select,
    })
}

impl LcuCircuit {
    pub fn n_qubits(&self) -> usize {
        self.ancilla_qubits + self.work_qubits
    }

    fn work(&self) -> Vec<usize> {
        (self.ancilla_qubits..self.n_qubits()).collect()
    }

    /// Ancilla preparation, V(x) on the work register, then V(x_i)†
    /// controlled on the ancilla reading i.
    pub fn gates(&self, fm: &dyn FeatureMap, x: u64) -> Result<Vec<GateOp>> {
        let work = self.work();
        let mut out = self.prep.clone();
        out.extend(fm.circuit(x)?.iter().map(|g| g.relabel(&work)));
        let a = self.ancilla_qubits;
        for (i, v) in &self.controlled_blocks {
            let body = inverse_circuit(v);
            if a == 0 {
                out.extend(body);
            } else {
                out.push(GateOp::Controlled {
                    controls: (0..a).collect(),
                    pattern: (0..a).map(|b| i >> (a - 1 - b) & 1 == 1).collect(),
                    body,
                });
            }
        }
        Ok(out)
    }

    /// ⟨ψ(x)|D ⊗ |0⟩⟨0||ψ(x)⟩.
    pub fn expectation(&self, fm: &dyn FeatureMap, x: u64) -> Result<f64> {
        let mut s = StateVector::zero_state(self.n_qubits())?;
        s.apply_all(&self.gates(fm, x)?)?;
        self.measurement.expectation(&s)
    }

    /// scale × expectation.
    pub fn evaluate(&self, fm: &dyn FeatureMap, x: u64) -> Result<f64> {
        Ok(self.scale * self.expectation(fm, x)?)
    }

    /// The same circuit with every V(x_i)† merged into uniformly controlled
    /// rotations, split into x-independent and x-dependent segments.
    pub fn brickwork_source(&self, fm: &dyn FeatureMap, x: u64) -> Result<Vec<Segment>> {
        let s = fm.state(x)?;
        let data = super::prepare_state(s.amplitudes(), &self.work(), self.with_phases)?;
        Ok(vec![
            Segment {
                role: Role::Param,
                gates: self.prep.clone(),
            },
            Segment {
                role: Role::Data,
                gates: data,
            },
            Segment {
                role: Role::Param,
                gates: self.select.iter().flat_map(Ucr::gates).collect(),
            },
        ])
    }
}
