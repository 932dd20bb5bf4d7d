use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardfn::{dataset_csv, PlantedFunction};
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: u64,
    pub y: f64,
}

/// Labelled inputs with labels in {−1, +1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_bits: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(n_bits: usize, rows: Vec<(u64, f64)>) -> Result<Self> {
        if n_bits == 0 || n_bits > 63 {
            return Err(Error::Validation(format!("{n_bits}-bit inputs")));
        }
        let mut samples = Vec::with_capacity(rows.len());
        for (x, y) in rows {
            if x >> n_bits != 0 {
                return Err(Error::Validation(format!("input {x} wider than {n_bits} bits")));
            }
            if y != 1.0 && y != -1.0 {
                return Err(Error::Validation(format!("label {y} is not ±1")));
            }
            samples.push(Sample { x, y });
        }
        Ok(Dataset { n_bits, samples })
    }

    /// `n` inputs drawn uniformly from the function's domain, labelled by
    /// y = 2Q(x) − 1. `stream` separates training and test draws.
    pub fn planted(f: &PlantedFunction, n: usize, seed: u64, stream: u64) -> Result<Self> {
        let domain = f.domain();
        let mut rng = stream_rng(seed, stream, &[]);
        let rows = (0..n)
            .map(|_| {
                let x = domain[rng.gen_range(0..domain.len())];
                Ok((x, f.label(x)?))
            })
            .collect::<Result<_>>()?;
        Dataset::new(f.n_bits(), rows)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn inputs(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y).collect()
    }

    /// `x_bits,label` CSV.
    pub fn to_csv(&self) -> String {
        let rows: Vec<(u64, f64)> = self.samples.iter().map(|s| (s.x, s.y)).collect();
        dataset_csv(self.n_bits, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardfn::parity_fn;

    #[test]
    fn rejects_bad_labels_and_widths() {
        assert!(Dataset::new(2, vec![(1, 0.0)]).is_err());
        assert!(Dataset::new(2, vec![(4, 1.0)]).is_err());
    }

    #[test]
    fn planted_labels_follow_q() {
        let f = parity_fn(3).unwrap();
        let d = Dataset::planted(&f, 20, 1, 5).unwrap();
        assert_eq!(d.len(), 20);
        for s in d.samples() {
            assert_eq!(s.y, 2.0 * f64::from(f.eval(s.x).unwrap()) - 1.0);
        }
        assert_eq!(d, Dataset::planted(&f, 20, 1, 5).unwrap());
    }
}
