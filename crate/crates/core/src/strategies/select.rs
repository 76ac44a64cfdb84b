//! Choice of the factor index `k` for a candidate entry `(i, j)`.
//!
//! These free functions evaluate the rules from scratch on `(R, U, V)`.
//! The sweeps use cached equivalents built from [`FitState`].

use crate::engine::FitState;
use crate::masked::{argmax_k, td_col, td_row, MaskedMatrix, Matrix};

/// Smallest index with the largest count.
pub(crate) fn argmax_count(counts: &[u32]) -> usize {
    let mut best = 0;
    for (l, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = l;
        }
    }
    best
}

/// Smallest index with the largest value.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (t, &x) in values.iter().enumerate() {
        if x > values[best] {
            best = t;
        }
    }
    best
}

/// TD: `k = f(i, j)`.
pub fn select_k_td(u: &Matrix, v: &Matrix, i: usize, j: usize) -> usize {
    argmax_k(u, v, i, j)
}

/// TD_A: the most frequent `f` value over the given entries of row `i` and
/// column `j` combined.
pub fn select_k_td_a(r: &MaskedMatrix, u: &Matrix, v: &Matrix, i: usize, j: usize) -> usize {
    let mut counts = vec![0u32; u.cols()];
    for t in (0..r.cols()).filter(|&t| r.is_given(i, t)) {
        counts[argmax_k(u, v, i, t)] += 1;
    }
    for t in (0..r.rows()).filter(|&t| r.is_given(t, j)) {
        counts[argmax_k(u, v, t, j)] += 1;
    }
    argmax_count(&counts)
}

/// TD_B: compare the worst column `j0` (by column distance) seen from row
/// `i` with the worst row `i0` (by row distance) seen from column `j`, and
/// take `f` at whichever approximation is larger (`j0` on ties).
pub fn select_k_td_b(r: &MaskedMatrix, u: &Matrix, v: &Matrix, i: usize, j: usize) -> usize {
    let col_err: Vec<f64> = (0..r.cols()).map(|t| td_col(r, u, v, t)).collect();
    let row_err: Vec<f64> = (0..r.rows()).map(|t| td_row(r, u, v, t)).collect();
    let j0 = argmax_first(&col_err);
    let i0 = argmax_first(&row_err);
    let trop = |a: usize, b: usize| {
        (0..u.cols())
            .map(|l| u[(a, l)] + v[(l, b)])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    if trop(i, j0) >= trop(i0, j) {
        argmax_k(u, v, i, j0)
    } else {
        argmax_k(u, v, i0, j)
    }
}

/// Per-column and per-row distance sums and `f` votes computed from the
/// state's cache. Valid until the next committed update.
pub(crate) struct Scores {
    pub accepted_at: u64,
    pub col_td: Vec<f64>,
    pub row_td: Vec<f64>,
    /// `col_votes[j * r + l]`: given entries of column `j` with `f = l`.
    pub col_votes: Vec<u32>,
    rank: usize,
}

impl Scores {
    #[allow(clippy::needless_range_loop)]
    pub fn compute(state: &FitState<'_>) -> Self {
        let data = state.data();
        let (m, n) = data.shape();
        let rank = state.rank();
        let mut col_td = vec![0.0; n];
        let mut row_td = vec![0.0; m];
        let mut col_votes = vec![0u32; n * rank];
        // accumulate in index order so sums match td_row/td_col exactly
        for i in 0..m {
            for j in 0..n {
                if let Some(d) = state.td(i, j) {
                    row_td[i] += d;
                    col_votes[j * rank + state.argmax(i, j)] += 1;
                }
            }
        }
        for j in 0..n {
            for i in 0..m {
                if let Some(d) = state.td(i, j) {
                    col_td[j] += d;
                }
            }
        }
        Self {
            accepted_at: state.accepted(),
            col_td,
            row_td,
            col_votes,
            rank,
        }
    }

    pub fn is_current(&self, state: &FitState<'_>) -> bool {
        self.accepted_at == state.accepted()
    }

    pub fn col_votes(&self, j: usize) -> &[u32] {
        &self.col_votes[j * self.rank..(j + 1) * self.rank]
    }
}
