use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dataset ranks of methods (1 = best), ties averaged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    /// `ranks[method][dataset]`.
    pub ranks: Vec<Vec<f64>>,
}

impl RankTable {
    pub fn methods(&self) -> usize {
        self.ranks.len()
    }

    pub fn datasets(&self) -> usize {
        self.ranks.first().map_or(0, Vec::len)
    }

    pub fn average_ranks(&self) -> Vec<f64> {
        self.ranks
            .iter()
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .collect()
    }
}

/// Ranks `scores[method][dataset]` within each dataset. With lower-is-better,
/// `+∞` (a target never reached) and `NaN` rank after all finite scores and
/// share their positions.
pub fn rank_methods(scores: &[Vec<f64>], lower_is_better: bool) -> Result<RankTable> {
    let k = scores.len();
    let n = scores.first().map_or(0, Vec::len);
    if k == 0 || scores.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidInput("score table must be a nonempty rectangle".into()));
    }
    let key = |x: f64| {
        let v = if lower_is_better { x } else { -x };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut ranks = vec![vec![0.0; n]; k];
    for d in 0..n {
        let mut order: Vec<(f64, usize)> = (0..k).map(|m| (key(scores[m][d]), m)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut start = 0;
        while start < k {
            let mut end = start + 1;
            while end < k && order[end].0 == order[start].0 {
                end += 1;
            }
            let avg = (start + 1 + end) as f64 / 2.0;
            for &(_, m) in &order[start..end] {
                ranks[m][d] = avg;
            }
            start = end;
        }
    }
    Ok(RankTable { ranks })
}

const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

/// Nemenyi critical difference `q_α·√(k(k+1)/(6N))` for `k` methods over `N`
/// datasets; `α` is 0.05 or 0.10 and `k` is 2 to 10.
pub fn nemenyi_cd(k: usize, datasets: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(Error::InvalidInput(format!("no Nemenyi table for alpha {alpha}")));
    };
    if !(2..=10).contains(&k) || datasets == 0 {
        return Err(Error::InvalidInput(format!(
            "Nemenyi table covers 2..=10 methods and at least one dataset, got k={k}, N={datasets}"
        )));
    }
    let q = table[k - 2];
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * datasets as f64)).sqrt())
}

/// Fraction of paired tests where the wide orientation has the smaller error.
pub fn omega(wide_errors: &[f64], tall_errors: &[f64]) -> Result<f64> {
    if wide_errors.len() != tall_errors.len() || wide_errors.is_empty() {
        return Err(Error::InvalidInput("omega needs equally many paired errors".into()));
    }
    let wins = wide_errors.iter().zip(tall_errors).filter(|(w, t)| w < t).count();
    Ok(wins as f64 / wide_errors.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties_and_never() {
        let scores = vec![
            vec![3.0, 1.0],
            vec![1.0, f64::INFINITY],
            vec![3.0, f64::INFINITY],
            vec![2.0, 0.5],
        ];
        let t = rank_methods(&scores, true).unwrap();
        assert_eq!(
            t.ranks,
            vec![vec![3.5, 2.0], vec![1.0, 3.5], vec![3.5, 3.5], vec![2.0, 1.0]]
        );
        for d in 0..2 {
            let s: f64 = t.ranks.iter().map(|r| r[d]).sum();
            assert_eq!(s, 10.0);
        }
        assert_eq!(t.average_ranks(), vec![2.75, 2.25, 3.5, 1.5]);
    }

    #[test]
    fn higher_is_better() {
        let t = rank_methods(&[vec![0.9], vec![0.1], vec![f64::NAN]], false).unwrap();
        assert_eq!(t.ranks, vec![vec![1.0], vec![2.0], vec![3.0]]);
    }

    #[test]
    fn cd_values() {
        let cd = nemenyi_cd(4, 50, 0.05).unwrap();
        assert!((cd - 2.569 * (20.0f64 / 300.0).sqrt()).abs() < 1e-12);
        assert!((cd - 0.663).abs() < 1e-3);
        assert!((nemenyi_cd(2, 1, 0.10).unwrap() - 1.645).abs() < 1e-12);
        assert!(nemenyi_cd(11, 5, 0.05).is_err());
        assert!(nemenyi_cd(4, 5, 0.01).is_err());
    }

    #[test]
    fn omega_endpoints() {
        assert_eq!(omega(&[1.0, 2.0], &[2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(omega(&[2.0, 3.0], &[2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(omega(&[1.0, 5.0], &[2.0, 3.0]).unwrap(), 0.5);
        assert!(omega(&[], &[]).is_err());
    }
}
