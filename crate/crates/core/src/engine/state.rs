use crate::error::{Error, Result};
use crate::masked::{approx_error, residuate_col, residuate_row, MaskedMatrix, Matrix};

use super::{UpdateOutcome, UpdateRule};

/// Fitting state for one run: the data, the current factors, and a cache of
/// `U ⊗ V` (maximum, smallest argmax, and maximum over the other indices)
/// used to score a trial update in `O(mn)`.
///
/// Between [`FitState::trial`] and [`FitState::commit`]/[`FitState::revert`]
/// the factors hold the trial values while the cache still describes the
/// pre-trial factors.
pub struct FitState<'a> {
    data: &'a MaskedMatrix,
    u: Matrix,
    v: Matrix,
    error: f64,
    best: Vec<f64>,
    arg: Vec<u32>,
    second: Vec<f64>,
    col_buf: Vec<f64>,
    row_buf: Vec<f64>,
    pending: bool,
    trials: u64,
    accepted: u64,
}

impl<'a> FitState<'a> {
    pub fn new(data: &'a MaskedMatrix, u: Matrix, v: Matrix) -> Result<Self> {
        let (m, n) = data.shape();
        if u.rows() != m || v.cols() != n || u.cols() != v.rows() || u.cols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "factors {}x{} and {}x{} for a {m}x{n} matrix",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            )));
        }
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::InvalidMatrix("factor entries must be finite".into()));
        }
        let mut state = Self {
            data,
            u,
            v,
            error: 0.0,
            best: vec![0.0; m * n],
            arg: vec![0; m * n],
            second: vec![0.0; m * n],
            col_buf: vec![0.0; m],
            row_buf: vec![0.0; n],
            pending: false,
            trials: 0,
            accepted: 0,
        };
        state.refresh_cache();
        state.error = state.cached_error();
        Ok(state)
    }

    #[inline]
    pub fn data(&self) -> &'a MaskedMatrix {
        self.data
    }

    #[inline]
    pub fn u(&self) -> &Matrix {
        &self.u
    }

    #[inline]
    pub fn v(&self) -> &Matrix {
        &self.v
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// Current `‖R − U ⊗ V‖_b` over given entries.
    #[inline]
    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn into_factors(self) -> (Matrix, Matrix) {
        (self.u, self.v)
    }

    /// `(U ⊗ V)[i, j]`.
    #[inline]
    pub fn approx(&self, i: usize, j: usize) -> f64 {
        self.best[i * self.data.cols() + j]
    }

    /// `f(i, j)`: smallest `k` attaining `(U ⊗ V)[i, j]`.
    #[inline]
    pub fn argmax(&self, i: usize, j: usize) -> usize {
        self.arg[i * self.data.cols() + j] as usize
    }

    /// Tropical distance at a given entry.
    #[inline]
    pub fn td(&self, i: usize, j: usize) -> Option<f64> {
        self.data.get(i, j).map(|x| (x - self.approx(i, j)).abs())
    }

    /// Row-major tropical distances; 0 at missing entries.
    pub fn td_matrix(&self) -> Vec<f64> {
        let vals = self.data.values().as_slice();
        self.data
            .mask()
            .iter()
            .enumerate()
            .map(|(idx, &g)| if g { (vals[idx] - self.best[idx]).abs() } else { 0.0 })
            .collect()
    }

    /// Applies F-ULF or F-URF at `(i, j, k)` and scores the result. The
    /// outcome must be passed to [`commit`](Self::commit) or
    /// [`revert`](Self::revert) before the next trial.
    pub fn trial(&mut self, rule: UpdateRule, i: usize, j: usize, k: usize) -> Result<UpdateOutcome> {
        debug_assert!(!self.pending, "trial started while another is pending");
        if k >= self.rank() {
            return Err(Error::InvalidInput(format!(
                "factor index {k} out of range for rank {}",
                self.rank()
            )));
        }
        let x = self.data.given(i, j)?;
        let saved_col = self.u.column(k);
        let saved_row = self.v.row(k).to_vec();
        apply_rule(
            self.data,
            &mut self.u,
            &mut self.v,
            rule,
            x,
            (i, j, k),
            &mut self.col_buf,
            &mut self.row_buf,
        );
        self.pending = true;
        self.trials += 1;
        let error = self.trial_error(k);
        Ok(UpdateOutcome {
            rule,
            i,
            j,
            k,
            error,
            prev_error: self.error,
            saved_col,
            saved_row,
        })
    }

    /// Keeps a trial update.
    pub fn commit(&mut self, outcome: UpdateOutcome) {
        debug_assert!(self.pending);
        self.pending = false;
        self.accepted += 1;
        self.error = outcome.error;
        self.refresh_cache();
    }

    /// Restores the factors saved by a trial.
    pub fn revert(&mut self, outcome: UpdateOutcome) {
        debug_assert!(self.pending);
        self.pending = false;
        restore(&mut self.u, &mut self.v, &outcome);
    }

    /// Trial followed by commit on strict error decrease, revert otherwise.
    pub fn try_update(&mut self, rule: UpdateRule, i: usize, j: usize, k: usize) -> Result<bool> {
        let outcome = self.trial(rule, i, j, k)?;
        if outcome.improves() {
            self.commit(outcome);
            Ok(true)
        } else {
            self.revert(outcome);
            Ok(false)
        }
    }

    /// The original whole-matrix ULF/URF: after seeding `U[i,k]` (or
    /// `V[k,j]`), every row of `V` and every column of `U` is recomputed by
    /// residuation and the error is evaluated from scratch. Kept on strict
    /// decrease, restored otherwise. In exact arithmetic this yields the same
    /// factors as [`trial`](Self::trial), at `O(mnr)` per call.
    pub fn try_update_whole(&mut self, rule: UpdateRule, i: usize, j: usize, k: usize) -> Result<bool> {
        debug_assert!(!self.pending, "whole update started while a trial is pending");
        if k >= self.rank() {
            return Err(Error::InvalidInput(format!(
                "factor index {k} out of range for rank {}",
                self.rank()
            )));
        }
        let x = self.data.given(i, j)?;
        let (u0, v0) = (self.u.clone(), self.v.clone());
        match rule {
            UpdateRule::Ulf => {
                self.u[(i, k)] = x - self.v[(k, j)];
                self.residuate_all_rows();
                self.residuate_all_cols();
            }
            UpdateRule::Urf => {
                self.v[(k, j)] = x - self.u[(i, k)];
                self.residuate_all_cols();
                self.residuate_all_rows();
            }
        }
        self.trials += 1;
        let error = approx_error(self.data, &self.u, &self.v)?;
        if error < self.error {
            self.error = error;
            self.accepted += 1;
            self.refresh_cache();
            Ok(true)
        } else {
            self.u = u0;
            self.v = v0;
            Ok(false)
        }
    }

    /// `V ← (−U)ᵀ ⊗* R`.
    fn residuate_all_rows(&mut self) {
        for l in 0..self.rank() {
            residuate_row(self.data, &self.u, l, &mut self.row_buf);
            self.v.row_mut(l).copy_from_slice(&self.row_buf);
        }
    }

    /// `U ← R ⊗* (−V)ᵀ`.
    fn residuate_all_cols(&mut self) {
        for l in 0..self.rank() {
            residuate_col(self.data, &self.v, l, &mut self.col_buf);
            self.u.set_column(l, &self.col_buf);
        }
    }

    /// Error of the current (trial) factors, where only index `k` changed
    /// since the cache was built.
    #[allow(clippy::needless_range_loop)]
    fn trial_error(&self, k: usize) -> f64 {
        let n = self.data.cols();
        let (vals, mask) = (self.data.values().as_slice(), self.data.mask());
        let vk = self.v.row(k);
        let mut total = 0.0;
        for i in 0..self.data.rows() {
            let uik = self.u[(i, k)];
            let base = i * n;
            for j in 0..n {
                let idx = base + j;
                if !mask[idx] {
                    continue;
                }
                let others = if self.arg[idx] as usize == k {
                    self.second[idx]
                } else {
                    self.best[idx]
                };
                let p = others.max(uik + vk[j]);
                total += (vals[idx] - p).abs();
            }
        }
        total
    }

    fn cached_error(&self) -> f64 {
        let vals = self.data.values().as_slice();
        let mut total = 0.0;
        for (idx, &g) in self.data.mask().iter().enumerate() {
            if g {
                total += (vals[idx] - self.best[idx]).abs();
            }
        }
        total
    }

    fn refresh_cache(&mut self) {
        let (m, n) = self.data.shape();
        let r = self.rank();
        for i in 0..m {
            let base = i * n;
            let best = &mut self.best[base..base + n];
            let arg = &mut self.arg[base..base + n];
            let second = &mut self.second[base..base + n];
            best.fill(f64::NEG_INFINITY);
            second.fill(f64::NEG_INFINITY);
            arg.fill(0);
            for l in 0..r {
                let uil = self.u[(i, l)];
                for (j, &vlj) in self.v.row(l).iter().enumerate() {
                    let s = uil + vlj;
                    if s > best[j] {
                        second[j] = best[j];
                        best[j] = s;
                        arg[j] = l as u32;
                    } else if s > second[j] {
                        second[j] = s;
                    }
                }
            }
        }
    }
}

/// The three assignment steps of F-ULF / F-URF. Touches only column `k` of
/// `u` and row `k` of `v`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn apply_rule(
    data: &MaskedMatrix,
    u: &mut Matrix,
    v: &mut Matrix,
    rule: UpdateRule,
    x: f64,
    (i, j, k): (usize, usize, usize),
    col_buf: &mut [f64],
    row_buf: &mut [f64],
) {
    match rule {
        UpdateRule::Ulf => {
            u[(i, k)] = x - v[(k, j)];
            residuate_row(data, u, k, row_buf);
            v.row_mut(k).copy_from_slice(row_buf);
            residuate_col(data, v, k, col_buf);
            u.set_column(k, col_buf);
        }
        UpdateRule::Urf => {
            v[(k, j)] = x - u[(i, k)];
            residuate_col(data, v, k, col_buf);
            u.set_column(k, col_buf);
            residuate_row(data, u, k, row_buf);
            v.row_mut(k).copy_from_slice(row_buf);
        }
    }
}

pub(crate) fn restore(u: &mut Matrix, v: &mut Matrix, outcome: &UpdateOutcome) {
    u.set_column(outcome.k, &outcome.saved_col);
    v.row_mut(outcome.k).copy_from_slice(&outcome.saved_row);
}
