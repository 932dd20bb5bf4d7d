use rand::Rng;

use crate::rng::{stream_rng, STREAM_BOOTSTRAP};

/// Bootstrap resamples used for standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Sum with a fixed pairwise tree, independent of how values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Bessel-corrected sample variance; NaN for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (n - 1) as f64
}

/// Standard error of the mean of per-group variances by a two-level
/// bootstrap: groups are resampled, then values inside each chosen group.
pub fn nested_bootstrap_se(groups: &[Vec<f64>], seed: u64) -> f64 {
    let replicates: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|b| {
            let mut rng = stream_rng(seed, STREAM_BOOTSTRAP, &[b as u64]);
            let per_group: Vec<f64> = (0..groups.len())
                .map(|_| {
                    let g = &groups[rng.gen_range(0..groups.len())];
                    let resampled: Vec<f64> =
                        (0..g.len()).map(|_| g[rng.gen_range(0..g.len())]).collect();
                    sample_variance(&resampled)
                })
                .collect();
            mean(&per_group)
        })
        .collect();
    sample_variance(&replicates).sqrt()
}

/// Standard error of a sample variance by resampling the values.
pub fn bootstrap_variance_se(values: &[f64], seed: u64) -> f64 {
    nested_bootstrap_se(std::slice::from_ref(&values.to_vec()), seed)
}

/// Weighted least-squares line y = a + b·x with known per-point σ.
/// Returns (slope, slope standard error).
pub fn weighted_slope(x: &[f64], y: &[f64], sigma: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 || sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return None;
    }
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let sw = pairwise_sum(&w);
    let xw: Vec<f64> = w.iter().zip(x).map(|(w, x)| w * x).collect();
    let yw: Vec<f64> = w.iter().zip(y).map(|(w, y)| w * y).collect();
    let xbar = pairwise_sum(&xw) / sw;
    let ybar = pairwise_sum(&yw) / sw;
    let sxx: Vec<f64> = w
        .iter()
        .zip(x)
        .map(|(w, x)| w * (x - xbar) * (x - xbar))
        .collect();
    let sxy: Vec<f64> = w
        .iter()
        .zip(x.iter().zip(y))
        .map(|(w, (x, y))| w * (x - xbar) * (y - ybar))
        .collect();
    let sxx = pairwise_sum(&sxx);
    if sxx <= 0.0 {
        return None;
    }
    let slope = pairwise_sum(&sxy) / sxx;
    Some((slope, (1.0 / sxx).sqrt()))
}
