//! Evaluation statistics: normalized error against a baseline, RMSE,
//! distance correlation, bootstrap intervals, rankings and critical
//! differences.

mod dcor;
mod ne;
mod rank;

pub use dcor::{dc_sample, distance_correlation, DEFAULT_DC_CAP};
pub use ne::{
    grid_values, normalized_error, normalized_values, regular_grid, time_to_reach, time_to_reach_curve, Reach,
};
pub use rank::{nemenyi_cd, omega, rank_methods, RankTable};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::masked::Matrix;

/// Root-mean-square difference over the entries where `mask` is true.
/// An empty mask gives `NaN`.
pub fn rmse(pred: &Matrix, truth: &Matrix, mask: &[bool]) -> Result<f64> {
    if pred.shape() != truth.shape() || mask.len() != truth.rows() * truth.cols() {
        return Err(Error::DimensionMismatch(format!(
            "prediction {:?}, truth {:?}, mask of {}",
            pred.shape(),
            truth.shape(),
            mask.len()
        )));
    }
    let (sum, count) = pred
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, c), ((p, t), _)| (s + (p - t) * (p - t), c + 1));
    Ok((sum / count as f64).sqrt())
}

/// Linear-interpolation quantile of unsorted data, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, q)
}

fn sorted_quantile(v: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pointwise quantile across equally long curves.
pub fn curve_quantile(curves: &[Vec<f64>], q: f64) -> Vec<f64> {
    let len = curves.first().map_or(0, Vec::len);
    (0..len)
        .map(|t| {
            let column: Vec<f64> = curves.iter().map(|c| c[t]).collect();
            quantile(&column, q)
        })
        .collect()
}

/// Percentile bootstrap interval of the mean over `resamples` seeded
/// resamples with replacement.
pub fn bootstrap_ci(samples: &[f64], resamples: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    bootstrap_ci_with(samples, resamples, level, seed, mean)
}

pub fn bootstrap_ci_with(
    samples: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
    statistic: impl Fn(&[f64]) -> f64,
) -> Result<(f64, f64)> {
    if samples.is_empty() || resamples == 0 {
        return Err(Error::InvalidInput(
            "bootstrap needs samples and at least one resample".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!("confidence level {level} not in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; samples.len()];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for x in buf.iter_mut() {
                *x = samples[rng.gen_range(0..samples.len())];
            }
            statistic(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((sorted_quantile(&stats, tail), sorted_quantile(&stats, 1.0 - tail)))
}
