use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{parse_params, ExperimentConfig, ExperimentOutput};
use crate::ansatz::{build_varivery, hea_family, telescoping_overlap, HeaConfig, ObservableKind, VariVeryConfig};
use crate::diagnostics::{
    bp_scaling_sweep, estimate_vanishing_similarity, Distribution, SweepParams, DEFAULT_N_THETA, DEFAULT_N_X,
};
use crate::error::{Error, Result};
use crate::hardfn::{bit_string, dlp_msb, parity_fn, DlpInstance, PlantedFunction};
use crate::kernel::{
    classical_baseline_fit, classify, fit, gram, predict_many, BaselineKind, DlpFeatureMap, FeatureMap,
    DEFAULT_LAMBDA,
};
use crate::lcu::{run_prop1_experiment, Prop1Config};
use crate::rng::{derive, stream_rng, STREAM_CASES, STREAM_TEST_SET, STREAM_TRAIN_SET};
use crate::statevec::matrix::random_unitary;
use crate::statevec::GateOp;
use crate::train::{
    empirical_mse, gradient, run_cor2_experiment, Dataset, Direction, GradientMethod, RateRule, TrainConfig,
};

fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn output<P: Serialize>(params: &P, metrics: Value, artifacts: Vec<(&str, String)>) -> Result<ExperimentOutput> {
    Ok(ExperimentOutput {
        resolved: serde_json::to_value(params)?,
        metrics,
        artifacts: artifacts.into_iter().map(|(n, c)| (n.to_string(), c)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TildeUParams {
    pub n_data: usize,
    pub t: usize,
    pub n_random: usize,
}

impl Default for TildeUParams {
    fn default() -> Self {
        TildeUParams {
            n_data: 2,
            t: 3,
            n_random: 20,
        }
    }
}

pub(super) fn tilde_u_check(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p: TildeUParams = parse_params(cfg)?;
    if p.n_data == 0 || p.n_data > 6 {
        return Err(Error::Validation(format!("n_data = {} (allowed 1..=6)", p.n_data)));
    }
    let mut csv = String::from("case,layers,overlap\n");
    let mut worst: f64 = 0.0;
    for case in 0..p.n_random {
        let mut rng = stream_rng(cfg.seed, STREAM_CASES, &[case as u64]);
        let u = [GateOp::unitary(
            random_unitary(1 << p.n_data, &mut rng),
            (0..p.n_data).collect(),
        )];
        for layers in 1..1usize << p.t {
            let ov = telescoping_overlap(&u, p.n_data, p.t, layers)?;
            worst = worst.max((1.0 - ov).abs());
            csv.push_str(&format!("{case},{layers},{}\n", f17(ov)));
        }
    }
    output(
        &p,
        json!({ "max_telescoping_deviation": worst, "cases": p.n_random }),
        vec![("telescoping.csv", csv)],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Cor2Params {
    pub function: PlantedFunction,
    pub t: usize,
    pub layers: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub steps: usize,
    pub rate: RateRule,
    pub init: Distribution,
    pub direction: Direction,
    pub method: GradientMethod,
}

impl Default for Cor2Params {
    fn default() -> Self {
        Cor2Params {
            function: parity_fn(2).expect("two-bit parity"),
            t: 3,
            layers: 4,
            n_train: 32,
            n_test: 32,
            steps: 500,
            rate: RateRule::Constant { eta: 0.1 },
            init: Distribution::uniform_angles(),
            direction: Direction::Descent,
            method: GradientMethod::ParamShift,
        }
    }
}

pub(super) fn cor2_train(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p: Cor2Params = parse_params(cfg)?;
    let model = VariVeryConfig::new(p.function.clone(), p.t, p.layers);
    let tc = TrainConfig {
        init: p.init.clone(),
        steps: p.steps,
        rate: p.rate,
        seed: cfg.seed,
        direction: p.direction,
        method: p.method,
    };
    let (record, trace) = run_cor2_experiment(&model, &tc, p.n_train, p.n_test, cfg.seed)?;
    let metrics = json!({
        "final_risk": record.final_risk,
        "test_risk": record.test_risk,
        "train_accuracy": record.train_accuracy,
        "test_accuracy": record.test_accuracy,
        "wrapped_theta_sum": record.wrapped_theta_sum,
        "final_theta": record.final_theta,
        "trained": record.trained(),
        "evaluations": trace.evaluations,
        "properties": record.properties,
    });
    output(&p, metrics, vec![("trace.csv", trace.to_csv())])
}

/// Depth of each width's brickwork.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum DepthRule {
    /// depth = n
    Width,
    Fixed { depth: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpSweepParams {
    pub depth: DepthRule,
    pub observable: ObservableKind,
    pub n_list: Vec<usize>,
    pub n_x: usize,
    pub n_theta: usize,
    pub p_theta: Distribution,
}

impl Default for BpSweepParams {
    fn default() -> Self {
        BpSweepParams {
            depth: DepthRule::Width,
            observable: ObservableKind::GlobalZAll,
            n_list: (2..=8).collect(),
            n_x: DEFAULT_N_X,
            n_theta: DEFAULT_N_THETA,
            p_theta: Distribution::uniform_angles(),
        }
    }
}

pub(super) fn bp_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p: BpSweepParams = parse_params(cfg)?;
    let builder = |n: usize| {
        let depth = match p.depth {
            DepthRule::Width => n,
            DepthRule::Fixed { depth } => depth,
        };
        let family = hea_family(&HeaConfig::new(n, depth, p.observable.clone()))?;
        Ok((family, Distribution::UniformBitstrings { n_bits: 1 }))
    };
    let sweep = SweepParams {
        p_theta: p.p_theta.clone(),
        n_x: p.n_x,
        n_theta: p.n_theta,
        seed: cfg.seed,
    };
    let curve = bp_scaling_sweep(builder, &p.n_list, &sweep)?;
    let metrics = json!({
        "slope": curve.slope,
        "slope_se": curve.slope_se,
        "decays": curve.decays(),
        "flat": curve.flat(),
        "estimates": curve.estimates,
    });
    output(&p, metrics, vec![("sweep.csv", curve.to_csv())])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimilarityParams {
    pub p: u64,
    pub g: u64,
    pub k_window: u32,
    pub n_pairs: usize,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            p: 23,
            g: 5,
            k_window: 2,
            n_pairs: 1000,
        }
    }
}

fn bp_row_csv(n: usize, est: &crate::diagnostics::BpEstimate) -> String {
    format!(
        "n,point_estimate,std_error,n_x,n_theta,seed\n{n},{},{},{},{},{}\n",
        f17(est.point_estimate),
        f17(est.standard_error),
        est.n_x_samples,
        est.n_theta_samples,
        est.seed
    )
}

pub(super) fn vanishing_similarity(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p: SimilarityParams = parse_params(cfg)?;
    let fm = DlpFeatureMap {
        instance: Arc::new(DlpInstance::new(p.p, p.g)?),
        k_window: p.k_window,
    };
    let d_x = Distribution::GroupElements { p: p.p, g: p.g };
    let est = estimate_vanishing_similarity(&fm, &d_x, p.n_pairs, cfg.seed)?;
    let metrics = json!({
        "point_estimate": est.point_estimate,
        "standard_error": est.standard_error,
        "positive_by_3se": est.positive_by(3.0),
        "n_qubits": est.n_qubits,
    });
    output(&p, metrics, vec![("similarity.csv", bp_row_csv(est.n_qubits, &est))])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelDlpParams {
    pub p: u64,
    pub g: u64,
    pub k_window: u32,
    pub n_train: usize,
    pub n_test: usize,
    pub lambda: f64,
    pub baseline: BaselineKind,
}

impl Default for KernelDlpParams {
    fn default() -> Self {
        KernelDlpParams {
            p: 23,
            g: 5,
            k_window: 2,
            n_train: 32,
            n_test: 32,
            lambda: DEFAULT_LAMBDA,
            baseline: BaselineKind::LogisticOnBits,
        }
    }
}

pub(super) fn kernel_dlp(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p: KernelDlpParams = parse_params(cfg)?;
    let inst = Arc::new(DlpInstance::new(p.p, p.g)?);
    let f = dlp_msb(&inst);
    let train = Dataset::planted(&f, p.n_train, cfg.seed, STREAM_TRAIN_SET)?;
    let test = Dataset::planted(&f, p.n_test, cfg.seed, STREAM_TEST_SET)?;
    let fm = DlpFeatureMap {
        instance: inst.clone(),
        k_window: p.k_window,
    };
    let k = gram(&fm, &train.inputs())?;
    let model = fit(&k, &train.labels(), p.lambda, &fm.id())?;
    let train_scores = predict_many(&model, &fm, &train.inputs())?;
    let test_scores = predict_many(&model, &fm, &test.inputs())?;
    let acc = |scores: &[f64], d: &Dataset| {
        if d.is_empty() {
            return f64::NAN;
        }
        scores.iter().zip(d.labels()).filter(|(s, y)| classify(**s) == *y).count() as f64 / d.len() as f64
    };
    let mse = |scores: &[f64], d: &Dataset| {
        scores.iter().zip(d.labels()).map(|(s, y)| (s - y).powi(2)).sum::<f64>() / (2.0 * d.len() as f64)
    };
    let baseline = classical_baseline_fit(&train, p.baseline, cfg.seed)?;
    let (kernel_train, kernel_test) = (acc(&train_scores, &train), acc(&test_scores, &test));
    let (base_train, base_test) = (baseline.accuracy(&train), baseline.accuracy(&test));

    let n_bits = inst.n_bits();
    let mut preds = String::from("split,x_bits,label,score,predicted\n");
    for (split, d, scores) in [("train", &train, &train_scores), ("test", &test, &test_scores)] {
        for (s, score) in d.samples().iter().zip(scores.iter()) {
            preds.push_str(&format!(
                "{split},{},{},{},{}\n",
                bit_string(s.x, n_bits),
                s.y,
                f17(*score),
                classify(*score)
            ));
        }
    }
    let accuracy = format!(
        "model,train_accuracy,test_accuracy\nkernel,{},{}\nbaseline,{},{}\n",
        f17(kernel_train),
        f17(kernel_test),
        f17(base_train),
        f17(base_test)
    );
    let metrics = json!({
        "gram_min_eigenvalue": k.min_eigenvalue(),
        "gram_symmetry_defect": k.symmetry_defect(),
        "ridge_residual": model.residual(&k, &train.labels()),
        "train_accuracy": kernel_train,
        "test_accuracy": kernel_test,
        "test_risk": if test.is_empty() { f64::NAN } else { mse(&test_scores, &test) },
        "baseline_train_accuracy": base_train,
        "baseline_test_accuracy": base_test,
    });
    output(
        &p,
        metrics,
        vec![
            ("gram.csv", k.to_csv()),
            ("predictions.csv", preds),
            ("accuracy.csv", accuracy),
            ("model.json", model.to_json()? + "\n"),
        ],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Prop1Params {
    p: u64,
    g: u64,
    k_window: u32,
    n_support: usize,
    lambda: f64,
    n_x: usize,
    n_theta: usize,
}

impl Default for Prop1Params {
    fn default() -> Self {
        let c = Prop1Config::default();
        Prop1Params {
            p: c.p,
            g: c.g,
            k_window: c.k_window,
            n_support: c.n_support,
            lambda: c.lambda,
            n_x: c.n_x,
            n_theta: c.n_theta,
        }
    }
}

pub(super) fn prop1_lcu(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p: Prop1Params = parse_params(cfg)?;
    let config = Prop1Config {
        p: p.p,
        g: p.g,
        k_window: p.k_window,
        n_support: p.n_support,
        lambda: p.lambda,
        n_x: p.n_x,
        n_theta: p.n_theta,
        seed: cfg.seed,
    };
    let (record, art) = run_prop1_experiment(&config)?;
    let domain = art.feature_map.instance.elements();
    let kernel = predict_many(&art.model, &art.feature_map, &domain)?;
    let mut preds = String::from("x,kernel,lcu,brickwork\n");
    for (x, kv) in domain.iter().zip(&kernel) {
        let lv = art.lcu.evaluate(&art.feature_map, *x)?;
        let bv = art.lcu.scale * art.family.template.evaluate(*x, &art.family.theta)?;
        preds.push_str(&format!("{x},{},{},{}\n", f17(*kv), f17(lv), f17(bv)));
    }
    let metrics = json!({
        "lcu_deviation": record.lcu_deviation,
        "brickwork_deviation": record.brickwork_deviation,
        "kernel_train_accuracy": record.kernel_train_accuracy,
        "recovered_train_accuracy": record.recovered_train_accuracy,
        "bp_point_estimate": record.bp.point_estimate,
        "bp_standard_error": record.bp.standard_error,
        "concentrated": record.concentrated(),
        "n_qubits": record.ancilla_qubits + record.work_qubits,
        "ancilla_qubits": record.ancilla_qubits,
        "depth": record.depth,
        "total_params": record.total_params,
        "param_bricks": record.param_bricks,
        "data_bricks": record.data_bricks,
        "scale": record.scale,
        "support": record.support,
        "alpha": record.alpha,
    });
    output(
        &p,
        metrics,
        vec![
            ("predictions.csv", preds),
            ("bp.csv", bp_row_csv(record.bp.n_qubits, &record.bp)),
            ("layout.json", art.family.to_json()? + "\n"),
        ],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradCheckParams {
    pub n_configs: usize,
    pub h: f64,
    pub n_train: usize,
}

impl Default for GradCheckParams {
    fn default() -> Self {
        GradCheckParams {
            n_configs: 50,
            h: 1e-5,
            n_train: 8,
        }
    }
}

/// Random layered model, parameters and planted dataset for case `case`.
pub fn random_grad_case(seed: u64, case: u64, n_train: usize) -> Result<(VariVeryConfig, Vec<f64>, Dataset)> {
    let mut rng = stream_rng(seed, STREAM_CASES, &[case]);
    let function = if rng.gen_bool(0.75) {
        parity_fn(rng.gen_range(1..=3))?
    } else {
        dlp_msb(&Arc::new(DlpInstance::new(23, 5)?))
    };
    let t = rng.gen_range(2..=3);
    let layers = rng.gen_range(1..1usize << t);
    let theta: Vec<f64> = (0..layers).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let data = Dataset::planted(&function, n_train, derive(seed, STREAM_CASES, &[case]), STREAM_TRAIN_SET)?;
    Ok((VariVeryConfig::new(function, t, layers), theta, data))
}

pub(super) fn grad_check(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p: GradCheckParams = parse_params(cfg)?;
    if !(p.h > 0.0 && p.h.is_finite()) {
        return Err(Error::Validation(format!("finite-difference step {}", p.h)));
    }
    let mut csv = String::from("case,function,layers,risk,max_deviation\n");
    let mut worst: f64 = 0.0;
    for case in 0..p.n_configs as u64 {
        let (model, theta, data) = random_grad_case(cfg.seed, case, p.n_train)?;
        let template = build_varivery(&model)?;
        let ps = gradient(&template, &theta, &data, GradientMethod::ParamShift)?;
        let fd = gradient(&template, &theta, &data, GradientMethod::FiniteDiff { h: p.h })?;
        let dev = ps.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        csv.push_str(&format!(
            "{case},{},{},{},{}\n",
            model.hard_fn.name(),
            model.layers,
            f17(empirical_mse(&template, &theta, &data)?),
            f17(dev)
        ));
    }
    output(
        &p,
        json!({ "max_deviation": worst, "cases": p.n_configs }),
        vec![("gradients.csv", csv)],
    )
}
