//! Fast single-index factor updates, initialization, and the fitting loop.

mod baseline;
mod init;
mod run;
mod state;
mod trajectory;

pub use baseline::{stmf_baseline, StmfBaseline};
pub use init::{random_acol_init, DEFAULT_ACOL_COLUMNS};
pub use run::{run_fit, Budget, Deadline, Epsilon, FitConfig, FitMethod, FitOutcome, StopReason, SweepCtx};
pub use state::FitState;
pub use trajectory::{Clock, Sample, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masked::{approx_error, MaskedMatrix, Matrix, Permutation};

/// Which factor the update is seeded from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateRule {
    /// Seed `U[i, k]` from `R[i, j]`, then residuate row `k` of `V`, then column `k` of `U`.
    Ulf,
    /// Seed `V[k, j]` from `R[i, j]`, then residuate column `k` of `U`, then row `k` of `V`.
    Urf,
}

/// Result of a single F-ULF/F-URF application, carrying what is needed to
/// undo it.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateOutcome {
    pub rule: UpdateRule,
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// Error after the update.
    pub error: f64,
    /// Error before the update.
    pub prev_error: f64,
    /// Column `k` of `U` before the update.
    pub saved_col: Vec<f64>,
    /// Row `k` of `V` before the update.
    pub saved_row: Vec<f64>,
}

impl UpdateOutcome {
    /// Strict decrease; ties do not count.
    #[inline]
    pub fn improves(&self) -> bool {
        self.error < self.prev_error
    }
}

/// How the fitted matrix relates to the caller's matrix: optionally
/// transposed, then rows and/or columns permuted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation {
    pub transposed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_perm: Option<Permutation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col_perm: Option<Permutation>,
}

impl Orientation {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Maps the caller's matrix into the fitting orientation.
    pub fn apply(&self, r: &MaskedMatrix) -> Result<MaskedMatrix> {
        let mut out = if self.transposed { r.transpose() } else { r.clone() };
        if let Some(p) = &self.row_perm {
            out = out.permute_rows(p)?;
        }
        if let Some(p) = &self.col_perm {
            out = out.permute_cols(p)?;
        }
        Ok(out)
    }
}

/// Coefficient factor `U` (m×r) and basis factor `V` (r×n), with the
/// orientation they were fitted in.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub u: Matrix,
    pub v: Matrix,
    pub orientation: Orientation,
}

impl FactorPair {
    pub fn new(u: Matrix, v: Matrix) -> Result<Self> {
        if u.cols() != v.rows() {
            return Err(Error::DimensionMismatch(format!(
                "U has {} columns but V has {} rows",
                u.cols(),
                v.rows()
            )));
        }
        Ok(Self {
            u,
            v,
            orientation: Orientation::identity(),
        })
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// Factors for the caller's original orientation.
    pub fn restore(&self) -> Result<FactorPair> {
        let o = &self.orientation;
        let u = match &o.row_perm {
            Some(p) => self.u.permute_rows(&p.inverted())?,
            None => self.u.clone(),
        };
        let v = match &o.col_perm {
            Some(p) => self.v.permute_cols(&p.inverted())?,
            None => self.v.clone(),
        };
        let (u, v) = if o.transposed {
            (v.transpose(), u.transpose())
        } else {
            (u, v)
        };
        Ok(FactorPair {
            u,
            v,
            orientation: Orientation::identity(),
        })
    }

    /// `U ⊗ V` in the pair's own orientation.
    pub fn product(&self) -> Matrix {
        crate::masked::trop_matmul(&self.u, &self.v).expect("factor shapes agree")
    }
}

fn update(
    r: &MaskedMatrix,
    u: &mut Matrix,
    v: &mut Matrix,
    rule: UpdateRule,
    (i, j, k): (usize, usize, usize),
) -> Result<UpdateOutcome> {
    let prev_error = approx_error(r, u, v)?;
    if k >= u.cols() {
        return Err(Error::InvalidInput(format!(
            "factor index {k} out of range for rank {}",
            u.cols()
        )));
    }
    let x = r.given(i, j)?;
    let saved_col = u.column(k);
    let saved_row = v.row(k).to_vec();
    let mut col_buf = vec![0.0; r.rows()];
    let mut row_buf = vec![0.0; r.cols()];
    state::apply_rule(r, u, v, rule, x, (i, j, k), &mut col_buf, &mut row_buf);
    let error = approx_error(r, u, v)?;
    Ok(UpdateOutcome {
        rule,
        i,
        j,
        k,
        error,
        prev_error,
        saved_col,
        saved_row,
    })
}

/// F-ULF at `(i, j, k)`: `U[i,k] ← R[i,j] − V[k,j]`, `V[k,·] ← (−U[·,k])ᵀ ⊗* R`,
/// `U[·,k] ← R ⊗* (−V[k,·])ᵀ`. Mutates `u` and `v`; the outcome carries the
/// saved column/row for [`revert`].
pub fn f_ulf(r: &MaskedMatrix, u: &mut Matrix, v: &mut Matrix, i: usize, j: usize, k: usize) -> Result<UpdateOutcome> {
    update(r, u, v, UpdateRule::Ulf, (i, j, k))
}

/// F-URF at `(i, j, k)`: `V[k,j] ← R[i,j] − U[i,k]`, then column `k` of `U`,
/// then row `k` of `V`.
pub fn f_urf(r: &MaskedMatrix, u: &mut Matrix, v: &mut Matrix, i: usize, j: usize, k: usize) -> Result<UpdateOutcome> {
    update(r, u, v, UpdateRule::Urf, (i, j, k))
}

/// Undoes an update returned by [`f_ulf`] or [`f_urf`].
pub fn revert(u: &mut Matrix, v: &mut Matrix, outcome: &UpdateOutcome) {
    state::restore(u, v, outcome);
}

#[cfg(test)]
mod tests;
