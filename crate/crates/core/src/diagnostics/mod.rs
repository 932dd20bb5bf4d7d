//! Monte-Carlo estimators of E_x[Var_θ f_θ(x)] and of the variance of
//! kernel values over random input pairs, plus scaling sweeps over width.

mod distribution;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use distribution::Distribution;

use crate::ansatz::CircuitTemplate;
use crate::error::{Error, Result};
use crate::kernel::FeatureMap;
use crate::rng::{derive, STREAM_ANGLES, STREAM_INPUTS, STREAM_PAIRS};
use stats::{bootstrap_variance_se, mean, nested_bootstrap_se, sample_variance, weighted_slope};

/// Default outer (input) sample count.
pub const DEFAULT_N_X: usize = 32;
/// Default inner (parameter) sample count.
pub const DEFAULT_N_THETA: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpEstimate {
    pub point_estimate: f64,
    pub standard_error: f64,
    pub n_x_samples: usize,
    pub n_theta_samples: usize,
    pub n_qubits: usize,
    pub seed: u64,
}

impl BpEstimate {
    /// More than three standard errors below zero.
    pub fn suspicious(&self) -> bool {
        self.point_estimate < -3.0 * self.standard_error
    }

    /// Estimate exceeds zero by more than `k` standard errors.
    pub fn positive_by(&self, k: f64) -> bool {
        self.point_estimate > k * self.standard_error
    }
}

/// E_x[Var_θ f_θ(x)] with x ~ d_x and θ ~ p_theta (one angle per parameter).
pub fn estimate_bp(
    family: &CircuitTemplate,
    p_theta: &Distribution,
    d_x: &Distribution,
    n_x: usize,
    n_theta: usize,
    seed: u64,
) -> Result<BpEstimate> {
    if n_theta < 2 {
        return Err(Error::Validation("n_theta must be at least 2".into()));
    }
    if n_x == 0 {
        return Err(Error::Validation("n_x must be at least 1".into()));
    }
    p_theta.validate()?;
    d_x.validate()?;
    let xs: Vec<u64> = (0..n_x as u64)
        .map(|i| d_x.draw_input(seed, STREAM_INPUTS, i))
        .collect::<Result<_>>()?;
    if let Some(x) = xs.iter().find(|&&x| !family.accepts(x)) {
        return Err(Error::Validation(format!("input {x} outside the family's data domain")));
    }
    let p = family.param_count();
    let values: Vec<f64> = (0..n_x * n_theta)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n_theta, k % n_theta);
            let theta = p_theta.draw_angles(seed, STREAM_ANGLES, &[i as u64, j as u64], p)?;
            family.evaluate(xs[i], &theta)
        })
        .collect::<Result<_>>()?;
    let groups: Vec<Vec<f64>> = values.chunks(n_theta).map(<[f64]>::to_vec).collect();
    let variances: Vec<f64> = groups.iter().map(|g| sample_variance(g)).collect();
    Ok(BpEstimate {
        point_estimate: mean(&variances),
        standard_error: nested_bootstrap_se(&groups, seed),
        n_x_samples: n_x,
        n_theta_samples: n_theta,
        n_qubits: family.n_qubits(),
        seed,
    })
}

/// Sample variance of k(x, x′) over `n_pairs` independent pairs from d_x.
pub fn estimate_vanishing_similarity(
    feature_map: &dyn FeatureMap,
    d_x: &Distribution,
    n_pairs: usize,
    seed: u64,
) -> Result<BpEstimate> {
    if n_pairs < 2 {
        return Err(Error::Validation("n_pairs must be at least 2".into()));
    }
    d_x.validate()?;
    let values: Vec<f64> = (0..n_pairs as u64)
        .into_par_iter()
        .map(|i| {
            let a = d_x.draw_input(seed, STREAM_PAIRS, 2 * i)?;
            let b = d_x.draw_input(seed, STREAM_PAIRS, 2 * i + 1)?;
            feature_map.kernel(a, b)
        })
        .collect::<Result<_>>()?;
    Ok(BpEstimate {
        point_estimate: sample_variance(&values),
        standard_error: bootstrap_variance_se(&values, seed),
        n_x_samples: n_pairs,
        n_theta_samples: 0,
        n_qubits: feature_map.n_qubits(),
        seed,
    })
}

/// Sampling budget shared by every width of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub p_theta: Distribution,
    pub n_x: usize,
    pub n_theta: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub n_list: Vec<usize>,
    pub estimates: Vec<BpEstimate>,
    /// Slope of ln(estimate) against n; None when undefined.
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
}

impl VarianceCurve {
    /// Slope negative by more than two standard errors.
    pub fn decays(&self) -> bool {
        matches!((self.slope, self.slope_se), (Some(s), Some(se)) if s < 0.0 && s.abs() > 2.0 * se)
    }

    /// Slope within two standard errors of zero.
    pub fn flat(&self) -> bool {
        matches!((self.slope, self.slope_se), (Some(s), Some(se)) if s.abs() < 2.0 * se)
    }

    /// `n,point_estimate,std_error,n_x,n_theta,seed` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,point_estimate,std_error,n_x,n_theta,seed\n");
        for (n, e) in self.n_list.iter().zip(&self.estimates) {
            out.push_str(&format!(
                "{n},{:.16e},{:.16e},{},{},{}\n",
                e.point_estimate, e.standard_error, e.n_x_samples, e.n_theta_samples, e.seed
            ));
        }
        out
    }
}

/// One estimate per width n (each with its own derived seed) and a
/// weighted fit of ln(estimate) against n, with σ_i = SE_i / estimate_i.
pub fn bp_scaling_sweep<F>(family_builder: F, n_list: &[usize], params: &SweepParams) -> Result<VarianceCurve>
where
    F: Fn(usize) -> Result<(CircuitTemplate, Distribution)>,
{
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("n_list must be strictly ascending".into()));
    }
    let mut estimates = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let (family, d_x) = family_builder(n)?;
        let seed = derive(params.seed, STREAM_INPUTS, &[n as u64]);
        estimates.push(estimate_bp(&family, &params.p_theta, &d_x, params.n_x, params.n_theta, seed)?);
    }
    let fit = if estimates.iter().all(|e| e.point_estimate > 0.0) {
        let x: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
        let y: Vec<f64> = estimates.iter().map(|e| e.point_estimate.ln()).collect();
        let s: Vec<f64> = estimates
            .iter()
            .map(|e| e.standard_error / e.point_estimate)
            .collect();
        weighted_slope(&x, &y, &s)
    } else {
        None
    };
    Ok(VarianceCurve {
        n_list: n_list.to_vec(),
        estimates,
        slope: fit.map(|f| f.0),
        slope_se: fit.map(|f| f.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{LayerSpec, ParamKind, Slot};
    use crate::kernel::BasisFeatureMap;
    use crate::statevec::{GateOp, Observable};

    fn rx_rz_family() -> CircuitTemplate {
        let slot = |kind, index| Slot::Param {
            kind,
            index,
            qubits: vec![0],
        };
        CircuitTemplate::new(
            1,
            vec![
                LayerSpec {
                    slots: vec![slot(ParamKind::RotationX, 0)],
                },
                LayerSpec {
                    slots: vec![slot(ParamKind::RotationZ, 1)],
                },
            ],
            Observable::z(0, 1),
        )
        .unwrap()
    }

    fn bits(n: usize) -> Distribution {
        Distribution::UniformBitstrings { n_bits: n }
    }

    #[test]
    fn constant_family_has_zero_variance() {
        let t = CircuitTemplate::new(
            1,
            vec![LayerSpec {
                slots: vec![Slot::Fixed {
                    gate: GateOp::Hadamard { target: 0 },
                }],
            }],
            Observable::z(0, 1),
        )
        .unwrap();
        let e = estimate_bp(&t, &Distribution::uniform_angles(), &bits(1), 4, 8, 0).unwrap();
        assert!(e.point_estimate.abs() < 1e-12);
    }

    #[test]
    fn single_qubit_variance_is_one_half() {
        let e = estimate_bp(&rx_rz_family(), &Distribution::uniform_angles(), &bits(1), 8, 256, 11).unwrap();
        assert!((e.point_estimate - 0.5).abs() <= 3.0 * e.standard_error, "{e:?}");
    }

    #[test]
    fn dense_integration_oracle_for_cosine_variance() {
        // Var(cos θ) for θ uniform: midpoint rule on a fine grid.
        let m = 200_000;
        let h = std::f64::consts::TAU / m as f64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 0..m {
            let c = ((k as f64 + 0.5) * h).cos();
            s1 += c * h;
            s2 += c * c * h;
        }
        let tau = std::f64::consts::TAU;
        assert!((s2 / tau - (s1 / tau).powi(2) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn se_shrinks_with_more_parameter_draws() {
        let se: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&k| {
                estimate_bp(&rx_rz_family(), &Distribution::uniform_angles(), &bits(1), 4, k, 5)
                    .unwrap()
                    .standard_error
            })
            .collect();
        assert!(se[0] > se[1] && se[1] > se[2], "{se:?}");
    }

    #[test]
    fn rejects_too_few_draws_and_wrong_kinds() {
        let t = rx_rz_family();
        let a = Distribution::uniform_angles();
        assert!(estimate_bp(&t, &a, &bits(1), 4, 1, 0).is_err());
        assert!(estimate_bp(&t, &a, &bits(1), 0, 4, 0).is_err());
        assert!(estimate_bp(&t, &bits(1), &bits(1), 2, 4, 0).is_err());
        assert!(estimate_bp(&t, &a, &a, 2, 4, 0).is_err());
    }

    #[test]
    fn basis_feature_map_similarity_is_bernoulli() {
        let n = 4;
        let fm = BasisFeatureMap { n_qubits: n };
        let p = 1.0 / 16.0;
        // Exhaustive pairs: population variance of δ_{x,x′} is p(1 − p).
        let all: Vec<f64> = (0..16u64)
            .flat_map(|a| (0..16u64).map(move |b| f64::from(u8::from(a == b))))
            .collect();
        let m = mean(&all);
        let pop = all.iter().map(|v| (v - m).powi(2)).sum::<f64>() / all.len() as f64;
        assert!((pop - p * (1.0 - p)).abs() < 1e-15);
        let e = estimate_vanishing_similarity(&fm, &bits(n), 2000, 3).unwrap();
        assert!((e.point_estimate - p * (1.0 - p)).abs() <= 3.0 * e.standard_error, "{e:?}");
    }

    #[test]
    fn constant_sweep_has_undefined_slope() {
        let params = SweepParams {
            p_theta: Distribution::uniform_angles(),
            n_x: 2,
            n_theta: 4,
            seed: 0,
        };
        let curve = bp_scaling_sweep(
            |n| {
                let t = CircuitTemplate::new(n, vec![], Observable::z(0, n))?;
                Ok((t, bits(n)))
            },
            &[1, 2, 3],
            &params,
        )
        .unwrap();
        assert!(curve.estimates.iter().all(|e| e.point_estimate == 0.0));
        assert!(curve.slope.is_none());
        assert!(!curve.decays() && !curve.flat());
        assert!(curve.to_csv().starts_with("n,point_estimate,std_error,n_x,n_theta,seed\n1,"));
    }

    #[test]
    fn estimates_are_deterministic() {
        let t = rx_rz_family();
        let a = Distribution::uniform_angles();
        let e1 = estimate_bp(&t, &a, &bits(1), 3, 16, 9).unwrap();
        let e2 = estimate_bp(&t, &a, &bits(1), 3, 16, 9).unwrap();
        assert_eq!(e1.point_estimate.to_bits(), e2.point_estimate.to_bits());
        assert_eq!(e1.standard_error.to_bits(), e2.standard_error.to_bits());
    }
}
