use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::masked::Matrix;

/// Largest sample used for distance correlation between two matrices.
pub const DEFAULT_DC_CAP: usize = 2000;

fn row_means(x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let means: Vec<f64> = x
        .iter()
        .map(|a| x.iter().fold(0.0, |s, b| s + (a - b).abs()) / n)
        .collect();
    let grand = means.iter().sum::<f64>() / n;
    (means, grand)
}

/// Sample distance correlation of two equally long vectors, in `[0, 1]`.
/// Uses double-centered distance matrices without storing them. A constant
/// input gives 0.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "distance correlation needs two samples of equal length >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (ax, gx) = row_means(x);
    let (ay, gy) = row_means(y);
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in 0..x.len() {
            let a = (x[i] - x[j]).abs() - ax[i] - ax[j] + gx;
            let b = (y[i] - y[j]).abs() - ay[i] - ay[j] + gy;
            xy += a * b;
            xx += a * a;
            yy += b * b;
        }
    }
    let denom = (xx * yy).sqrt();
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((xy / denom).max(0.0).sqrt().min(1.0))
}

/// Paired samples of `truth` and `approx` over `mask`, subsampled without
/// replacement to at most `cap` entries.
pub fn dc_sample(
    truth: &Matrix,
    approx: &Matrix,
    mask: &[bool],
    cap: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if truth.shape() != approx.shape() || mask.len() != truth.rows() * truth.cols() {
        return Err(Error::DimensionMismatch(format!(
            "truth {:?}, approximation {:?}, mask of {}",
            truth.shape(),
            approx.shape(),
            mask.len()
        )));
    }
    let mut idx: Vec<usize> = (0..mask.len()).filter(|&p| mask[p]).collect();
    if idx.len() > cap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<usize> = index::sample(&mut rng, idx.len(), cap)
            .into_iter()
            .map(|p| idx[p])
            .collect();
        picked.sort_unstable();
        idx = picked;
    }
    Ok((
        idx.iter().map(|&p| truth.as_slice()[p]).collect(),
        idx.iter().map(|&p| approx.as_slice()[p]).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_constant() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        assert!((distance_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((distance_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(distance_correlation(&[1.0; 5], &x[..5]).unwrap(), 0.0);
        assert!(distance_correlation(&[1.0], &[1.0]).is_err());
        assert!(distance_correlation(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn symmetric() {
        let x = [0.1, 0.7, 0.3, 0.9, 0.4];
        let y = [1.0, -2.0, 0.5, 0.25, 3.0];
        let a = distance_correlation(&x, &y).unwrap();
        let b = distance_correlation(&y, &x).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn sampling_caps_and_is_seeded() {
        let t = Matrix::from_fn(10, 10, |i, j| (i * 10 + j) as f64);
        let a = t.map(|v| v + 1.0);
        let mask = vec![true; 100];
        let (x, y) = dc_sample(&t, &a, &mask, 20, 4).unwrap();
        assert_eq!(x.len(), 20);
        assert!(x.iter().zip(&y).all(|(p, q)| q - p == 1.0));
        assert_eq!(dc_sample(&t, &a, &mask, 20, 4).unwrap().0, x);
        assert_eq!(dc_sample(&t, &a, &mask, 1000, 4).unwrap().0.len(), 100);
    }
}
