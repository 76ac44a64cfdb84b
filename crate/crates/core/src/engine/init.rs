use rand::Rng;

use crate::error::{Error, Result};
use crate::masked::{residuate_row, MaskedMatrix, Matrix};

/// Number of data columns averaged per factor column when not configured.
pub const DEFAULT_ACOL_COLUMNS: usize = 5;

/// Random Acol initialization.
///
/// Each column of `U` is the entrywise mean over given values of `q`
/// uniformly drawn (with replacement) columns of `R`, with `q` capped at
/// `n`. A row where every drawn column is missing falls back to the row's
/// mean over given entries. `V` is then the residuation `(−U)ᵀ ⊗* R`, so the
/// pair starts as a subsolution of `R`.
pub fn random_acol_init<G: Rng + ?Sized>(
    r: &MaskedMatrix,
    rank: usize,
    q: usize,
    rng: &mut G,
) -> Result<(Matrix, Matrix)> {
    if rank < 1 {
        return Err(Error::InvalidConfig("rank must be at least 1".into()));
    }
    if q < 1 {
        return Err(Error::InvalidConfig(
            "Random Acol needs at least one column per average".into(),
        ));
    }
    r.ensure_coverage()?;
    let (m, n) = r.shape();
    let q = q.min(n);
    let row_means = r.given_row_means();

    let mut u = Matrix::zeros(m, rank);
    let mut picks = vec![0usize; q];
    for l in 0..rank {
        for p in picks.iter_mut() {
            *p = rng.gen_range(0..n);
        }
        for i in 0..m {
            let mut sum = 0.0;
            let mut count = 0usize;
            for &j in &picks {
                if let Some(x) = r.get(i, j) {
                    sum += x;
                    count += 1;
                }
            }
            u[(i, l)] = if count > 0 { sum / count as f64 } else { row_means[i] };
        }
    }

    let mut v = Matrix::zeros(rank, n);
    for k in 0..rank {
        residuate_row(r, &u, k, v.row_mut(k));
    }
    Ok((u, v))
}
