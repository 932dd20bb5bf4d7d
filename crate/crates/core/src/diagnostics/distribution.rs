use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardfn::{mod_pow, DlpInstance};
use crate::rng::stream_rng;

/// Sampling specification for parameters or inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    /// Independent uniform angles on [low, high).
    UniformAngles { low: f64, high: f64 },
    /// Uniform over 0..2^n_bits.
    UniformBitstrings { n_bits: usize },
    /// g^k mod p with k uniform over 0..p−1.
    GroupElements { p: u64, g: u64 },
    /// Uniform choice from an explicit list.
    FixedList { values: Vec<f64> },
}

impl Distribution {
    pub fn uniform_angles() -> Self {
        Distribution::UniformAngles {
            low: 0.0,
            high: std::f64::consts::TAU,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::UniformAngles { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::Validation(format!("angle range [{low}, {high})")));
                }
            }
            Distribution::UniformBitstrings { n_bits } => {
                if *n_bits == 0 || *n_bits > 63 {
                    return Err(Error::Validation(format!("{n_bits}-bit strings")));
                }
            }
            Distribution::GroupElements { p, g } => {
                DlpInstance::new(*p, *g)?;
            }
            Distribution::FixedList { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Validation("fixed list must be finite and non-empty".into()));
                }
            }
        }
        Ok(())
    }

    /// True when draws are integer inputs rather than angles.
    pub fn is_input_distribution(&self) -> bool {
        match self {
            Distribution::UniformAngles { .. } => false,
            Distribution::UniformBitstrings { .. } | Distribution::GroupElements { .. } => true,
            Distribution::FixedList { values } => {
                values.iter().all(|v| *v >= 0.0 && v.fract() == 0.0 && *v < 2f64.powi(63))
            }
        }
    }

    /// Input number `index` of stream `stream` under `seed`.
    pub fn draw_input(&self, seed: u64, stream: u64, index: u64) -> Result<u64> {
        let mut rng = stream_rng(seed, stream, &[index]);
        match self {
            Distribution::UniformBitstrings { n_bits } => Ok(rng.gen_range(0..1u64 << n_bits)),
            Distribution::GroupElements { p, g } => Ok(mod_pow(*g, rng.gen_range(0..p - 1), *p)),
            Distribution::FixedList { values } if self.is_input_distribution() => {
                Ok(values[rng.gen_range(0..values.len())] as u64)
            }
            _ => Err(Error::Validation(format!("{self:?} does not produce inputs"))),
        }
    }

    /// `len` angles for draw `index` of stream `stream` under `seed`.
    pub fn draw_angles(&self, seed: u64, stream: u64, index: &[u64], len: usize) -> Result<Vec<f64>> {
        let mut rng = stream_rng(seed, stream, index);
        match self {
            Distribution::UniformAngles { low, high } => {
                Ok((0..len).map(|_| rng.gen_range(*low..*high)).collect())
            }
            Distribution::FixedList { values } => Ok((0..len)
                .map(|_| values[rng.gen_range(0..values.len())])
                .collect()),
            _ => Err(Error::Validation(format!("{self:?} does not produce angles"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_deterministic() {
        let d = Distribution::UniformBitstrings { n_bits: 6 };
        assert_eq!(d.draw_input(3, 1, 9).unwrap(), d.draw_input(3, 1, 9).unwrap());
        let a = Distribution::uniform_angles();
        let v = a.draw_angles(3, 2, &[1, 2], 5).unwrap();
        assert_eq!(v, a.draw_angles(3, 2, &[1, 2], 5).unwrap());
        assert!(v.iter().all(|t| (0.0..std::f64::consts::TAU).contains(t)));
    }

    #[test]
    fn group_elements_are_units() {
        let d = Distribution::GroupElements { p: 23, g: 5 };
        d.validate().unwrap();
        for i in 0..50 {
            let x = d.draw_input(0, 1, i).unwrap();
            assert!((1..23).contains(&x));
        }
    }

    #[test]
    fn kind_mismatch_is_validation_error() {
        let a = Distribution::uniform_angles();
        assert!(matches!(a.draw_input(0, 0, 0), Err(Error::Validation(_))));
        let b = Distribution::UniformBitstrings { n_bits: 2 };
        assert!(matches!(b.draw_angles(0, 0, &[0], 1), Err(Error::Validation(_))));
    }
}
