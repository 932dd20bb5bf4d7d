use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::classify;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_INIT};
use crate::train::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    LogisticOnBits,
    LinearOnBits,
}

/// sign(w·bits(x) + b).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub kind: BaselineKind,
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn features(x: u64, n_bits: usize) -> Vec<f64> {
    (0..n_bits)
        .map(|i| ((x >> (n_bits - 1 - i)) & 1) as f64)
        .collect()
}

const LOGISTIC_STEPS: usize = 5000;
const LOGISTIC_RATE: f64 = 0.5;

impl LinearClassifier {
    pub fn score(&self, x: u64) -> f64 {
        let f = features(x, self.weights.len());
        self.bias + f.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict(&self, x: u64) -> f64 {
        classify(self.score(x))
    }

    pub fn accuracy(&self, data: &Dataset) -> f64 {
        let hits = data
            .samples()
            .iter()
            .filter(|s| self.predict(s.x) == s.y)
            .count();
        hits as f64 / data.len() as f64
    }
}

/// Linear model over the raw bits of x. Logistic regression runs full-batch
/// gradient descent from a small seeded initialization; the linear kind is
/// a least-squares fit to the ±1 labels.
pub fn classical_baseline_fit(data: &Dataset, kind: BaselineKind, seed: u64) -> Result<LinearClassifier> {
    if data.is_empty() {
        return Err(Error::Validation("empty dataset".into()));
    }
    let n = data.n_bits();
    let rows: Vec<Vec<f64>> = data.samples().iter().map(|s| features(s.x, n)).collect();
    let y: Vec<f64> = data.samples().iter().map(|s| s.y).collect();
    match kind {
        BaselineKind::LinearOnBits => {
            let a = DMatrix::from_fn(rows.len(), n + 1, |i, j| if j < n { rows[i][j] } else { 1.0 });
            let sol = a
                .svd(true, true)
                .solve(&DVector::from_column_slice(&y), 1e-12)
                .map_err(|e| Error::Conditioning {
                    condition: f64::INFINITY,
                    message: e.to_string(),
                })?;
            Ok(LinearClassifier {
                kind,
                weights: sol.iter().take(n).copied().collect(),
                bias: sol[n],
            })
        }
        BaselineKind::LogisticOnBits => {
            let mut rng = stream_rng(seed, STREAM_INIT, &[]);
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.01..0.01)).collect();
            let mut b = 0.0;
            let m = rows.len() as f64;
            for _ in 0..LOGISTIC_STEPS {
                let mut gw = vec![0.0; n];
                let mut gb = 0.0;
                for (f, &yi) in rows.iter().zip(&y) {
                    let z = b + f.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
                    // d/dz log(1 + e^{−y z}) = −y σ(−y z)
                    let g = -yi / (1.0 + (yi * z).exp());
                    for (gk, fk) in gw.iter_mut().zip(f) {
                        *gk += g * fk / m;
                    }
                    gb += g / m;
                }
                for (wk, gk) in w.iter_mut().zip(&gw) {
                    *wk -= LOGISTIC_RATE * gk;
                }
                b -= LOGISTIC_RATE * gb;
            }
            Ok(LinearClassifier {
                kind,
                weights: w,
                bias: b,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bit_is_separable() {
        let d = Dataset::new(1, vec![(0, -1.0), (1, 1.0), (0, -1.0), (1, 1.0)]).unwrap();
        for kind in [BaselineKind::LogisticOnBits, BaselineKind::LinearOnBits] {
            assert_eq!(classical_baseline_fit(&d, kind, 0).unwrap().accuracy(&d), 1.0);
        }
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let d = Dataset::new(2, vec![(0, -1.0), (1, 1.0), (2, 1.0), (3, -1.0)]).unwrap();
        let c = classical_baseline_fit(&d, BaselineKind::LinearOnBits, 0).unwrap();
        assert!(c.accuracy(&d) <= 0.75);
        let l = classical_baseline_fit(&d, BaselineKind::LogisticOnBits, 0).unwrap();
        assert!(l.accuracy(&d) <= 0.75);
    }

    #[test]
    fn logistic_is_deterministic_given_seed() {
        let d = Dataset::new(2, vec![(0, -1.0), (1, 1.0), (2, 1.0)]).unwrap();
        let a = classical_baseline_fit(&d, BaselineKind::LogisticOnBits, 4).unwrap();
        let b = classical_baseline_fit(&d, BaselineKind::LogisticOnBits, 4).unwrap();
        assert_eq!(a, b);
    }
}
