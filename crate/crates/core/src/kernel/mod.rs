//! Quantum kernels from state overlaps, kernel ridge regression in the span
//! of the training points, and linear baselines on raw bits.

mod baseline;
mod feature;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use baseline::{classical_baseline_fit, BaselineKind, LinearClassifier};
pub use feature::{BasisFeatureMap, CircuitFeatureMap, DlpFeatureMap, FeatureMap};

use crate::error::{Error, Result};
use crate::statevec::{overlap, StateVector};

/// Default ridge strength.
pub const DEFAULT_LAMBDA: f64 = 1e-3;
/// Scores within this distance of zero classify as +1.
pub const TIE_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;

/// Symmetric matrix of kernel values on a support set.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub support: Vec<u64>,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.entries - self.entries.transpose()).abs().max()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .min()
    }

    pub fn max_diagonal_defect(&self) -> f64 {
        self.entries
            .diagonal()
            .iter()
            .map(|d| (d - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Comma-separated rows, one per support point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len())
                .map(|j| format!("{:.16e}", self.entries[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn states(fm: &dyn FeatureMap, inputs: &[u64]) -> Result<Vec<StateVector>> {
    inputs.par_iter().map(|&x| fm.state(x)).collect()
}

/// K_ij = |⟨φ(x_i)|φ(x_j)⟩|².
pub fn gram(fm: &dyn FeatureMap, inputs: &[u64]) -> Result<GramMatrix> {
    let s = states(fm, inputs)?;
    let n = inputs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| Ok(overlap(&s[i], &s[j])?.norm_sqr()))
        .collect::<Result<_>>()?;
    let mut entries = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(values) {
        entries[(i, j)] = v;
        entries[(j, i)] = v;
    }
    Ok(GramMatrix {
        entries,
        support: inputs.to_vec(),
    })
}

/// α with f_α(x) = Σ_i α_i k(x, x_i).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub alpha: Vec<f64>,
    pub support: Vec<u64>,
    pub lambda: f64,
    pub feature_map: String,
}

/// Ridge solution α = (K + λI)⁻¹ y by Cholesky, with one refinement step
/// when the residual exceeds 1e-8.
pub fn fit(gram: &GramMatrix, labels: &[f64], lambda: f64, feature_map: &str) -> Result<KernelModel> {
    let n = gram.len();
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} support points", labels.len())));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Validation(format!("ridge strength {lambda} must be positive")));
    }
    let a = &gram.entries + DMatrix::identity(n, n) * lambda;
    let y = DVector::from_column_slice(labels);
    let condition = || {
        let ev = a.clone().symmetric_eigen().eigenvalues;
        ev.max().abs() / ev.min().abs()
    };
    let chol = a.clone().cholesky().ok_or_else(|| Error::Conditioning {
        condition: condition(),
        message: "K + λI is not positive definite".into(),
    })?;
    let mut alpha = chol.solve(&y);
    let mut residual = (&a * &alpha - &y).amax();
    if residual > RESIDUAL_TOL {
        alpha += chol.solve(&(&y - &a * &alpha));
        residual = (&a * &alpha - &y).amax();
    }
    if residual > RESIDUAL_TOL || alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::Conditioning {
            condition: condition(),
            message: format!("ridge residual {residual:.3e}"),
        });
    }
    Ok(KernelModel {
        alpha: alpha.iter().copied().collect(),
        support: gram.support.clone(),
        lambda,
        feature_map: feature_map.to_string(),
    })
}

impl KernelModel {
    /// ‖(K + λI)α − y‖∞ against a Gram matrix on the same support.
    pub fn residual(&self, gram: &GramMatrix, labels: &[f64]) -> f64 {
        let n = self.alpha.len();
        let a = &gram.entries + DMatrix::identity(n, n) * self.lambda;
        (a * DVector::from_column_slice(&self.alpha) - DVector::from_column_slice(labels)).amax()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// f_α(x) = Σ_i α_i k(x, x_i).
pub fn predict(model: &KernelModel, fm: &dyn FeatureMap, x: u64) -> Result<f64> {
    let s = fm.state(x)?;
    let mut score = 0.0;
    for (a, &xi) in model.alpha.iter().zip(&model.support) {
        score += a * overlap(&s, &fm.state(xi)?)?.norm_sqr();
    }
    Ok(score)
}

/// Scores at several inputs, sharing the support states.
pub fn predict_many(model: &KernelModel, fm: &dyn FeatureMap, xs: &[u64]) -> Result<Vec<f64>> {
    let support = states(fm, &model.support)?;
    xs.par_iter()
        .map(|&x| {
            let s = fm.state(x)?;
            let mut score = 0.0;
            for (a, si) in model.alpha.iter().zip(&support) {
                score += a * overlap(&s, si)?.norm_sqr();
            }
            Ok(score)
        })
        .collect()
}

/// sign(score), with ties resolved to +1.
pub fn classify(score: f64) -> f64 {
    if score < -TIE_TOL {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardfn::DlpInstance;
    use proptest::prelude::*;
    use std::collections::HashSet;
    use std::sync::Arc;

    fn dlp() -> DlpFeatureMap {
        DlpFeatureMap {
            instance: Arc::new(DlpInstance::new(23, 5).unwrap()),
            k_window: 2,
        }
    }

    fn from_entries(rows: &[&[f64]]) -> GramMatrix {
        let n = rows.len();
        GramMatrix {
            entries: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
            support: (0..n as u64).collect(),
        }
    }

    #[test]
    fn identical_and_orthogonal_inputs() {
        let g = gram(&dlp(), &[4, 4, 4]).unwrap();
        assert!(g.entries.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let b = gram(&BasisFeatureMap { n_qubits: 3 }, &[0, 1, 2, 3]).unwrap();
        assert_eq!(b.entries, DMatrix::identity(4, 4));
    }

    #[test]
    fn dlp_entries_match_coset_intersections() {
        let fm = dlp();
        let xs = [1u64, 5, 9, 17];
        let g = gram(&fm, &xs).unwrap();
        for (i, &a) in xs.iter().enumerate() {
            for (j, &b) in xs.iter().enumerate() {
                let sa: HashSet<u64> = fm.instance.window(2, a).unwrap().into_iter().collect();
                let sb: HashSet<u64> = fm.instance.window(2, b).unwrap().into_iter().collect();
                let k = (sa.intersection(&sb).count() as f64 / 4.0).powi(2);
                assert!((g.entries[(i, j)] - k).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hand_solved_systems() {
        let m = fit(&from_entries(&[&[1.0, 0.0], &[0.0, 1.0]]), &[1.0, -3.0], 1.0, "t").unwrap();
        assert!((m.alpha[0] - 0.5).abs() < 1e-14 && (m.alpha[1] + 1.5).abs() < 1e-14);
        let c = 0.7;
        let m = fit(&from_entries(&[&[1.0, 1.0], &[1.0, 1.0]]), &[c, c], 1.0, "t").unwrap();
        assert!(m.alpha.iter().all(|a| (a - c / 3.0).abs() < 1e-14));
    }

    #[test]
    fn zero_model_classifies_positive() {
        let m = KernelModel {
            alpha: vec![0.0],
            support: vec![3],
            lambda: 1.0,
            feature_map: "basis(2)".into(),
        };
        let fm = BasisFeatureMap { n_qubits: 2 };
        assert_eq!(predict(&m, &fm, 1).unwrap(), 0.0);
        assert_eq!(classify(0.0), 1.0);
        let one_hot = KernelModel {
            alpha: vec![1.0],
            ..m
        };
        assert_eq!(predict(&one_hot, &fm, 3).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = from_entries(&[&[1.0]]);
        assert!(matches!(fit(&g, &[1.0, 2.0], 1.0, "t"), Err(Error::Shape(_))));
        assert!(matches!(fit(&g, &[1.0], 0.0, "t"), Err(Error::Validation(_))));
        let bad = from_entries(&[&[-5.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(fit(&bad, &[1.0, 1.0], 1.0, "t"), Err(Error::Conditioning { .. })));
    }

    #[test]
    fn interpolation_limit() {
        let g = gram(&BasisFeatureMap { n_qubits: 3 }, &[0, 3, 5, 6]).unwrap();
        let y = [1.0, -1.0, -1.0, 1.0];
        let m = fit(&g, &y, 1e-10, "basis").unwrap();
        let fm = BasisFeatureMap { n_qubits: 3 };
        for (x, yi) in g.support.iter().zip(y) {
            assert!((predict(&m, &fm, *x).unwrap() - yi).abs() <= 1e-6);
        }
    }

    fn psd_from(seed: &[f64], n: usize) -> DMatrix<f64> {
        let b = DMatrix::from_fn(n, n, |i, j| seed[(i * n + j) % seed.len()]);
        &b * b.transpose()
    }

    proptest! {
        #[test]
        fn ridge_matches_least_squares_oracle(
            seed in proptest::collection::vec(-1.0f64..1.0, 36),
            y in proptest::collection::vec(-1.0f64..1.0, 6),
        ) {
            let k = psd_from(&seed, 6);
            let g = GramMatrix { entries: k.clone(), support: (0..6).collect() };
            let m = fit(&g, &y, 0.1, "t").unwrap();
            let a = k + DMatrix::identity(6, 6) * 0.1;
            let oracle = a.svd(true, true).solve(&DVector::from_column_slice(&y), 1e-14).unwrap();
            for (p, q) in m.alpha.iter().zip(oracle.iter()) {
                prop_assert!((p - q).abs() <= 1e-8);
            }
        }

        #[test]
        fn ridge_objective_is_minimal_in_the_span(
            seed in proptest::collection::vec(-1.0f64..1.0, 25),
            y in proptest::collection::vec(-1.0f64..1.0, 5),
            candidate in proptest::collection::vec(-2.0f64..2.0, 5),
        ) {
            let k = psd_from(&seed, 5);
            let g = GramMatrix { entries: k.clone(), support: (0..5).collect() };
            let lambda = 1e-3;
            let m = fit(&g, &y, lambda, "t").unwrap();
            let yv = DVector::from_column_slice(&y);
            let objective = |b: &DVector<f64>| {
                let r = &k * b - &yv;
                r.dot(&r) + lambda * b.dot(&(&k * b))
            };
            let alpha = DVector::from_column_slice(&m.alpha);
            prop_assert!(objective(&DVector::from_column_slice(&candidate)) >= objective(&alpha) - 1e-8);
        }
    }
}
