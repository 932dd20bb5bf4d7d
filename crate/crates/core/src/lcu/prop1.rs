use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::brickwork::{compile_family, BrickworkFamily};
use super::circuit::{compile_lcu, LcuCircuit};
use crate::diagnostics::{estimate_bp, BpEstimate, Distribution};
use crate::error::{Error, Result};
use crate::hardfn::{dlp_msb, DlpInstance};
use crate::kernel::{classify, fit, gram, predict_many, DlpFeatureMap, KernelModel, DEFAULT_LAMBDA};
use crate::rng::{stream_rng, STREAM_TRAIN_SET};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prop1Config {
    pub p: u64,
    pub g: u64,
    pub k_window: u32,
    /// Training-set size N.
    pub n_support: usize,
    pub lambda: f64,
    pub n_x: usize,
    pub n_theta: usize,
    pub seed: u64,
}

impl Default for Prop1Config {
    fn default() -> Self {
        Prop1Config {
            p: 23,
            g: 5,
            k_window: 2,
            n_support: 8,
            lambda: DEFAULT_LAMBDA,
            n_x: 8,
            n_theta: 32,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop1Record {
    pub config: Prop1Config,
    pub support: Vec<u64>,
    pub labels: Vec<f64>,
    pub alpha: Vec<f64>,
    pub scale: f64,
    pub ancilla_qubits: usize,
    pub work_qubits: usize,
    pub depth: usize,
    pub total_params: usize,
    pub param_bricks: usize,
    pub data_bricks: usize,
    /// max over the group of |scale·LCU − kernel predictor|.
    pub lcu_deviation: f64,
    /// max over the group of |scale·brickwork − scale·LCU|.
    pub brickwork_deviation: f64,
    pub kernel_train_accuracy: f64,
    pub recovered_train_accuracy: f64,
    pub bp: BpEstimate,
}

impl Prop1Record {
    /// Uniform-angle variance below the single-rotation value 1/2 by more
    /// than three standard errors.
    pub fn concentrated(&self) -> bool {
        self.bp.point_estimate + 3.0 * self.bp.standard_error < 0.5
    }
}

/// Everything the experiment builds, for callers that need more than the record.
pub struct Prop1Artifacts {
    pub model: KernelModel,
    pub lcu: LcuCircuit,
    pub family: BrickworkFamily,
    pub feature_map: DlpFeatureMap,
}

/// Fits the discrete-log kernel on N group elements, compiles the model
/// into an ancilla circuit and then a brickwork family, checks both against
/// the predictor on the whole group, and estimates the uniform-angle
/// variance of the same family.
pub fn run_prop1_experiment(cfg: &Prop1Config) -> Result<(Prop1Record, Prop1Artifacts)> {
    let inst = Arc::new(DlpInstance::new(cfg.p, cfg.g)?);
    let f = dlp_msb(&inst);
    let domain = inst.elements();
    if cfg.n_support == 0 || cfg.n_support > domain.len() {
        return Err(Error::Validation(format!(
            "{} support points from a group of {}",
            cfg.n_support,
            domain.len()
        )));
    }
    let mut pool = domain.clone();
    pool.shuffle(&mut stream_rng(cfg.seed, STREAM_TRAIN_SET, &[]));
    let mut support = pool[..cfg.n_support].to_vec();
    support.sort_unstable();
    let labels: Vec<f64> = support.iter().map(|&x| f.label(x)).collect::<Result<_>>()?;

    let fm = DlpFeatureMap {
        instance: inst.clone(),
        k_window: cfg.k_window,
    };
    let k = gram(&fm, &support)?;
    let model = fit(&k, &labels, cfg.lambda, &crate::kernel::FeatureMap::id(&fm))?;
    let lcu = compile_lcu(&model, &fm)?;

    let predictor = predict_many(&model, &fm, &domain)?;
    let lcu_values: Vec<f64> = domain
        .par_iter()
        .map(|&x| lcu.evaluate(&fm, x))
        .collect::<Result<_>>()?;
    let family = compile_family(
        |x| lcu.brickwork_source(&fm, x),
        &domain,
        lcu.n_qubits(),
        lcu.measurement.clone(),
    )?;
    let brick_values: Vec<f64> = domain
        .par_iter()
        .map(|&x| Ok(lcu.scale * family.template.evaluate(x, &family.theta)?))
        .collect::<Result<_>>()?;
    let max_dev = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    let lcu_deviation = max_dev(&lcu_values, &predictor);
    let brickwork_deviation = max_dev(&brick_values, &lcu_values);

    let accuracy = |values: &[f64]| {
        support
            .iter()
            .zip(&labels)
            .filter(|(x, y)| {
                let i = domain.iter().position(|d| d == *x).expect("support lies in the group");
                classify(values[i]) == **y
            })
            .count() as f64
            / support.len() as f64
    };
    let kernel_train_accuracy = accuracy(&predictor);
    let recovered_train_accuracy = accuracy(&brick_values);

    let bp = estimate_bp(
        &family.template,
        &Distribution::uniform_angles(),
        &Distribution::GroupElements { p: cfg.p, g: cfg.g },
        cfg.n_x,
        cfg.n_theta,
        cfg.seed,
    )?;

    let layout_roles = family.template.appearances().len();
    let record = Prop1Record {
        config: cfg.clone(),
        support,
        labels,
        alpha: model.alpha.clone(),
        scale: lcu.scale,
        ancilla_qubits: lcu.ancilla_qubits,
        work_qubits: lcu.work_qubits,
        depth: family.depth,
        total_params: family.total_params,
        param_bricks: layout_roles,
        data_bricks: family.total_params / crate::ansatz::BRICK_PARAMS - layout_roles,
        lcu_deviation,
        brickwork_deviation,
        kernel_train_accuracy,
        recovered_train_accuracy,
        bp,
    };
    Ok((
        record,
        Prop1Artifacts {
            model,
            lcu,
            family,
            feature_map: fm,
        },
    ))
}
