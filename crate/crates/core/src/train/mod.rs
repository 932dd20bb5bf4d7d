//! Gradient-based training: empirical risk, parameter-shift and
//! finite-difference gradients, the restricted update rule, and the
//! end-to-end layered-model experiment.

mod cor2;
mod dataset;

use std::cell::Cell;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

pub use cor2::{run_cor2_experiment, wrap_angle, Cor2Record, TRAINED_RISK};
pub use dataset::{Dataset, Sample};

use crate::ansatz::{CircuitTemplate, Shift};
use crate::diagnostics::Distribution;
use crate::error::{Error, Result};
use crate::rng::STREAM_INIT;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum GradientMethod {
    ParamShift,
    FiniteDiff { h: f64 },
}

/// Step size C as a function of the step index and the current gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateRule {
    Constant { eta: f64 },
    /// η₀ / t
    InverseT { eta0: f64 },
    /// η / (‖∇‖₂ + ε)
    GradNormScaled { eta: f64, eps: f64 },
}

/// Step-size hook; rules may depend only on the step index and gradient.
pub trait StepSize: Sync {
    fn rate(&self, step: usize, grad: &[f64]) -> f64;
}

impl StepSize for RateRule {
    fn rate(&self, step: usize, grad: &[f64]) -> f64 {
        match *self {
            RateRule::Constant { eta } => eta,
            RateRule::InverseT { eta0 } => eta0 / step.max(1) as f64,
            RateRule::GradNormScaled { eta, eps } => {
                eta / (grad.iter().map(|g| g * g).sum::<f64>().sqrt() + eps)
            }
        }
    }
}

impl RateRule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RateRule::Constant { eta } => eta > 0.0 && eta.is_finite(),
            RateRule::InverseT { eta0 } => eta0 > 0.0 && eta0.is_finite(),
            RateRule::GradNormScaled { eta, eps } => {
                eta > 0.0 && eta.is_finite() && eps > 0.0 && eps.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid rate rule {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// θ ← θ − C∇R̂
    #[default]
    Descent,
    /// θ ← θ + C∇R̂
    Ascent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub init: Distribution,
    pub steps: usize,
    pub rate: RateRule,
    pub seed: u64,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default = "default_method")]
    pub method: GradientMethod,
}

fn default_method() -> GradientMethod {
    GradientMethod::ParamShift
}

impl TrainConfig {
    pub fn new(steps: usize, rate: RateRule, seed: u64) -> Self {
        TrainConfig {
            init: Distribution::uniform_angles(),
            steps,
            rate,
            seed,
            direction: Direction::Descent,
            method: GradientMethod::ParamShift,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rate.validate()?;
        self.init.validate()?;
        if let GradientMethod::FiniteDiff { h } = self.method {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Validation(format!("finite-difference step {h}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub theta: Vec<f64>,
    pub risk: f64,
    /// ‖∇R̂‖∞ of the gradient that produced this iterate (NaN at step 0).
    pub grad_inf_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<StepRecord>,
    /// Risk evaluations made, shifted probes included.
    pub evaluations: usize,
}

impl TrainTrace {
    pub fn final_theta(&self) -> &[f64] {
        &self.records.last().expect("trace has step 0").theta
    }

    pub fn final_risk(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.risk)
    }

    pub fn risks(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.risk).collect()
    }

    /// `step,risk,grad_inf_norm` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,risk,grad_inf_norm\n");
        for r in &self.records {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", r.step, r.risk, r.grad_inf_norm));
        }
        out
    }
}

/// Risk evaluations restricted to explicit points, with an audit counter.
struct RiskOracle<'a> {
    template: &'a CircuitTemplate,
    unique: Vec<u64>,
    slot_of: Vec<usize>,
    labels: Vec<f64>,
    evaluations: Cell<usize>,
}

impl<'a> RiskOracle<'a> {
    fn new(template: &'a CircuitTemplate, data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Validation("empty dataset".into()));
        }
        let mut unique: Vec<u64> = data.inputs();
        unique.sort_unstable();
        unique.dedup();
        if let Some(x) = unique.iter().find(|&&x| !template.accepts(x)) {
            return Err(Error::Domain(format!("input {x} outside the template's data domain")));
        }
        let slot_of = data
            .samples()
            .iter()
            .map(|s| unique.binary_search(&s.x).expect("present"))
            .collect();
        Ok(RiskOracle {
            template,
            unique,
            slot_of,
            labels: data.labels(),
            evaluations: Cell::new(0),
        })
    }

    /// f at every distinct input.
    fn predictions(&self, theta: &[f64], shift: Option<Shift>) -> Result<Vec<f64>> {
        self.evaluations.set(self.evaluations.get() + 1);
        self.unique
            .iter()
            .map(|&x| self.template.evaluate_shifted(x, theta, shift))
            .collect()
    }

    fn risk(&self, preds: &[f64]) -> f64 {
        let sq: f64 = self
            .slot_of
            .iter()
            .zip(&self.labels)
            .map(|(&u, y)| (preds[u] - y).powi(2))
            .sum();
        sq / (2.0 * self.labels.len() as f64)
    }

    /// ∂R̂/∂θ at θ, given the predictions already computed there.
    fn gradient(&self, theta: &[f64], preds: &[f64], method: GradientMethod) -> Result<Vec<f64>> {
        let p = self.template.param_count();
        let n = self.labels.len() as f64;
        let mut grad = vec![0.0; p];
        match method {
            GradientMethod::ParamShift => {
                let appearances = self.template.appearances();
                if let Some(a) = appearances.iter().find(|a| !a.kind.is_pauli_rotation()) {
                    return Err(Error::UnsupportedMethod(format!(
                        "parameter shift on a {:?} slot",
                        a.kind
                    )));
                }
                for (k, a) in appearances.iter().enumerate() {
                    let probe = |delta| {
                        self.predictions(
                            theta,
                            Some(Shift {
                                appearance: k,
                                offset: 0,
                                delta,
                            }),
                        )
                    };
                    let plus = probe(FRAC_PI_2)?;
                    let minus = probe(-FRAC_PI_2)?;
                    let chain: f64 = self
                        .slot_of
                        .iter()
                        .zip(&self.labels)
                        .map(|(&u, y)| (preds[u] - y) * (plus[u] - minus[u]) / 2.0)
                        .sum();
                    grad[a.index] += chain / n;
                }
            }
            GradientMethod::FiniteDiff { h } => {
                let mut shifted = theta.to_vec();
                for k in 0..p {
                    shifted[k] = theta[k] + h;
                    let up = self.risk(&self.predictions(&shifted, None)?);
                    shifted[k] = theta[k] - h;
                    let down = self.risk(&self.predictions(&shifted, None)?);
                    shifted[k] = theta[k];
                    grad[k] = (up - down) / (2.0 * h);
                }
            }
        }
        Ok(grad)
    }
}

/// R̂_S(θ) = (1/2N) Σ_i (f(x_i; θ) − y_i)².
pub fn empirical_mse(template: &CircuitTemplate, theta: &[f64], data: &Dataset) -> Result<f64> {
    template.check_theta(theta)?;
    let oracle = RiskOracle::new(template, data)?;
    Ok(oracle.risk(&oracle.predictions(theta, None)?))
}

/// ∇_θ R̂_S(θ).
pub fn gradient(
    template: &CircuitTemplate,
    theta: &[f64],
    data: &Dataset,
    method: GradientMethod,
) -> Result<Vec<f64>> {
    template.check_theta(theta)?;
    let oracle = RiskOracle::new(template, data)?;
    let preds = oracle.predictions(theta, None)?;
    oracle.gradient(theta, &preds, method)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.abs() > m || x.is_nan() { x.abs() } else { m })
}

/// θ_t = θ_{t−1} ∓ C(t, ∇)·∇R̂_S(θ_{t−1}) for T steps from θ₀ ~ init.
pub fn train_gradient_based(template: &CircuitTemplate, data: &Dataset, cfg: &TrainConfig) -> Result<TrainTrace> {
    train_with_step_size(template, data, cfg, &cfg.rate)
}

/// As [`train_gradient_based`] with a caller-supplied step-size rule.
pub fn train_with_step_size(
    template: &CircuitTemplate,
    data: &Dataset,
    cfg: &TrainConfig,
    step_size: &dyn StepSize,
) -> Result<TrainTrace> {
    cfg.validate()?;
    let oracle = RiskOracle::new(template, data)?;
    let mut theta = cfg
        .init
        .draw_angles(cfg.seed, STREAM_INIT, &[], template.param_count())?;
    let mut preds = oracle.predictions(&theta, None)?;
    let mut trace = TrainTrace {
        records: vec![StepRecord {
            step: 0,
            theta: theta.clone(),
            risk: oracle.risk(&preds),
            grad_inf_norm: f64::NAN,
        }],
        evaluations: 0,
    };
    let abort = |step, message: String, mut trace: TrainTrace| {
        trace.evaluations = oracle.evaluations.get();
        Error::NumericalAbort {
            step,
            message,
            trace: Some(Box::new(trace)),
        }
    };
    if !trace.records[0].risk.is_finite() {
        return Err(abort(0, "non-finite initial risk".into(), trace));
    }
    let sign = match cfg.direction {
        Direction::Descent => -1.0,
        Direction::Ascent => 1.0,
    };
    for step in 1..=cfg.steps {
        let grad = oracle.gradient(&theta, &preds, cfg.method)?;
        let g_inf = inf_norm(&grad);
        if !g_inf.is_finite() {
            return Err(abort(step, "non-finite gradient".into(), trace));
        }
        let c = step_size.rate(step, &grad);
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t += sign * c * g;
        }
        preds = oracle.predictions(&theta, None)?;
        let risk = oracle.risk(&preds);
        if !risk.is_finite() {
            return Err(abort(step, "non-finite risk".into(), trace));
        }
        trace.records.push(StepRecord {
            step,
            theta: theta.clone(),
            risk,
            grad_inf_norm: g_inf,
        });
    }
    trace.evaluations = oracle.evaluations.get();
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_varivery, LayerSpec, ParamKind, Slot, VariVeryConfig};
    use crate::hardfn::parity_fn;
    use crate::statevec::Observable;
    use std::f64::consts::PI;

    fn cosine_model() -> CircuitTemplate {
        CircuitTemplate::new(
            1,
            vec![LayerSpec {
                slots: vec![Slot::Param {
                    kind: ParamKind::RotationX,
                    index: 0,
                    qubits: vec![0],
                }],
            }],
            Observable::z(0, 1),
        )
        .unwrap()
    }

    fn varivery(l: usize) -> (CircuitTemplate, Dataset) {
        let f = parity_fn(2).unwrap();
        let t = build_varivery(&VariVeryConfig::new(f.clone(), 3, l)).unwrap();
        (t, Dataset::planted(&f, 16, 3, 1).unwrap())
    }

    #[test]
    fn risk_examples() {
        let t = cosine_model();
        let one = Dataset::new(1, vec![(0, 1.0), (1, 1.0)]).unwrap();
        assert!(empirical_mse(&t, &[0.0], &one).unwrap().abs() < 1e-15);
        // f ≡ 0 at θ = π/2 with labels +1.
        assert!((empirical_mse(&t, &[PI / 2.0], &one).unwrap() - 0.5).abs() < 1e-12);
        let (v, d) = varivery(4);
        let theta = [1.0, 0.5, 1.0, PI - 2.5];
        assert!((empirical_mse(&v, &theta, &d).unwrap() - 2.0).abs() < 1e-10);
        assert!(matches!(empirical_mse(&v, &[0.0], &d), Err(Error::Shape(_))));
    }

    #[test]
    fn hand_derivative_of_cosine_model() {
        let t = cosine_model();
        let d = Dataset::new(1, vec![(0, 1.0)]).unwrap();
        let g = gradient(&t, &[1.0], &d, GradientMethod::ParamShift).unwrap();
        let expect = (1.0f64.cos() - 1.0) * -(1.0f64.sin());
        assert!((g[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn stationary_at_full_turns() {
        let (v, d) = varivery(4);
        let theta = [2.0, 2.5, 3.0, 4.0 * PI - 7.5];
        let g = gradient(&v, &theta, &d, GradientMethod::ParamShift).unwrap();
        assert!(inf_norm(&g) <= 1e-8);
        assert!(empirical_mse(&v, &theta, &d).unwrap() <= 1e-12);
    }

    #[test]
    fn brick_slots_reject_parameter_shift() {
        let cfg = crate::ansatz::HeaConfig::new(2, 1, crate::ansatz::ObservableKind::LocalZ1);
        let t = crate::ansatz::hea_family(&cfg).unwrap();
        let d = Dataset::new(1, vec![(0, 1.0)]).unwrap();
        let theta = vec![0.1; t.param_count()];
        assert!(matches!(
            gradient(&t, &theta, &d, GradientMethod::ParamShift),
            Err(Error::UnsupportedMethod(_))
        ));
        assert!(gradient(&t, &theta, &d, GradientMethod::FiniteDiff { h: 1e-5 }).is_ok());
    }

    #[test]
    fn zero_steps_keep_only_initialization() {
        let (v, d) = varivery(2);
        let trace = train_gradient_based(&v, &d, &TrainConfig::new(0, RateRule::Constant { eta: 0.1 }, 0)).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert!(trace.records[0].grad_inf_norm.is_nan());
        assert_eq!(trace.evaluations, 1);
    }

    #[test]
    fn evaluation_count_matches_locality_contract() {
        let (v, d) = varivery(3);
        let cfg = TrainConfig::new(7, RateRule::Constant { eta: 0.1 }, 2);
        let trace = train_gradient_based(&v, &d, &cfg).unwrap();
        assert_eq!(trace.records.len(), 8);
        assert_eq!(trace.evaluations, 1 + 7 * (2 * 3 + 1));
    }

    #[test]
    fn small_constant_rate_decreases_monotonically() {
        let (v, d) = varivery(4);
        let cfg = TrainConfig::new(200, RateRule::Constant { eta: 0.01 }, 5);
        let r = train_gradient_based(&v, &d, &cfg).unwrap().risks();
        assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn ascent_flag_raises_risk() {
        let (v, d) = varivery(2);
        let mut cfg = TrainConfig::new(50, RateRule::Constant { eta: 0.05 }, 1);
        cfg.direction = Direction::Ascent;
        let r = train_gradient_based(&v, &d, &cfg).unwrap().risks();
        assert!(r.last().unwrap() >= &r[0]);
    }

    #[test]
    fn rate_rules() {
        let g = [3.0, 4.0];
        assert_eq!(RateRule::Constant { eta: 0.2 }.rate(9, &g), 0.2);
        assert_eq!(RateRule::InverseT { eta0: 1.0 }.rate(4, &g), 0.25);
        assert!((RateRule::GradNormScaled { eta: 1.0, eps: 0.0 + 1e-12 }.rate(1, &g) - 0.2).abs() < 1e-12);
        assert!(RateRule::Constant { eta: 0.0 }.validate().is_err());
    }

    #[test]
    fn trace_csv_header() {
        let (v, d) = varivery(1);
        let trace = train_gradient_based(&v, &d, &TrainConfig::new(2, RateRule::Constant { eta: 0.1 }, 0)).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("step,risk,grad_inf_norm\n0,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
