//! Dense matrices with an explicit given/missing mask, plus the max-plus and
//! masked min-plus kernels the factorization is built on.
//!
//! Values live in a row-major `Vec<f64>`. Missing entries are tracked by a
//! parallel boolean mask; the value stored under a missing entry is
//! unspecified and never read by the kernels.

mod kernels;
mod perm;

pub use kernels::{
    approx_error, argmax_k, b_norm, masked_minplus, residuate_col, residuate_row, td, td_col, td_row, trop_matmul,
};
pub use perm::{sort_perm_by_min, Permutation};

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis selector for row/column operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Cols,
}

/// Dense row-major matrix over the extended reals.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    /// Max-plus identity: 0 on the diagonal, -inf elsewhere.
    pub fn trop_identity(n: usize) -> Self {
        let mut m = Self::filled(n, n, f64::NEG_INFINITY);
        for i in 0..n {
            m[(i, i)] = 0.0;
        }
        m
    }

    /// Builds a matrix from row slices. All rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &x) in values.iter().enumerate() {
            self.data[i * self.cols + j] = x;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `out[i, :] = self[p.forward[i], :]`
    pub fn permute_rows(&self, p: &Permutation) -> Result<Self> {
        p.check_len(self.rows, "rows")?;
        let mut data = Vec::with_capacity(self.data.len());
        for &src in p.forward() {
            data.extend_from_slice(self.row(src));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `out[:, j] = self[:, p.forward[j]]`
    pub fn permute_cols(&self, p: &Permutation) -> Result<Self> {
        p.check_len(self.cols, "columns")?;
        let fwd = p.forward();
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self[(i, fwd[j])]))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Dense matrix with a per-entry given/missing mask (`true` = given).
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedMatrix {
    values: Matrix,
    mask: Vec<bool>,
    given: usize,
}

impl MaskedMatrix {
    /// Every given entry must be finite. Row/column coverage is not checked
    /// here; see [`MaskedMatrix::ensure_coverage`].
    pub fn new(values: Matrix, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != values.data.len() {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} entries for a {}x{} matrix",
                mask.len(),
                values.rows,
                values.cols
            )));
        }
        let mut given = 0;
        for (idx, (&x, &g)) in values.data.iter().zip(&mask).enumerate() {
            if g {
                if !x.is_finite() {
                    return Err(Error::InvalidMatrix(format!(
                        "given entry ({}, {}) is not finite",
                        idx / values.cols.max(1),
                        idx % values.cols.max(1)
                    )));
                }
                given += 1;
            }
        }
        Ok(Self { values, mask, given })
    }

    /// Fully observed matrix.
    pub fn full(values: Matrix) -> Result<Self> {
        let mask = vec![true; values.data.len()];
        Self::new(values, mask)
    }

    /// Convenience constructor: `None` marks a missing entry.
    pub fn from_options<R: AsRef<[Option<f64>]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        let mut mask = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for x in row {
                data.push(x.unwrap_or(0.0));
                mask.push(x.is_some());
            }
        }
        Self::new(Matrix::new(rows.len(), cols, data)?, mask)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.values.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.values.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    #[inline]
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn given_count(&self) -> usize {
        self.given
    }

    #[inline]
    pub fn is_given(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.values.cols + j]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let idx = i * self.values.cols + j;
        self.mask[idx].then(|| self.values.data[idx])
    }

    /// Value at a given entry; error if the entry is missing.
    pub fn given(&self, i: usize, j: usize) -> Result<f64> {
        self.get(i, j).ok_or(Error::MissingEntry { row: i, col: j })
    }

    /// Given entries in row-major order as `(i, j, value)`.
    pub fn iter_given(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.values.cols;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &g)| g)
            .map(move |(idx, _)| (idx / cols, idx % cols, self.values.data[idx]))
    }

    pub fn row_has_given(&self, i: usize) -> bool {
        let c = self.values.cols;
        self.mask[i * c..(i + 1) * c].iter().any(|&g| g)
    }

    pub fn col_has_given(&self, j: usize) -> bool {
        (0..self.values.rows).any(|i| self.is_given(i, j))
    }

    /// Checks that every row and every column has at least one given entry,
    /// which the residuation steps need to stay finite.
    pub fn ensure_coverage(&self) -> Result<()> {
        if self.rows() == 0 || self.cols() == 0 {
            return Err(Error::InvalidMatrix("matrix is empty".into()));
        }
        if let Some(i) = (0..self.rows()).find(|&i| !self.row_has_given(i)) {
            return Err(Error::InvalidMatrix(format!("row {i} has no given entries")));
        }
        if let Some(j) = (0..self.cols()).find(|&j| !self.col_has_given(j)) {
            return Err(Error::InvalidMatrix(format!("column {j} has no given entries")));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let (m, n) = self.shape();
        let mut mask = vec![false; m * n];
        for i in 0..m {
            for j in 0..n {
                mask[j * m + i] = self.mask[i * n + j];
            }
        }
        Self {
            values: self.values.transpose(),
            mask,
            given: self.given,
        }
    }

    pub fn permute_rows(&self, p: &Permutation) -> Result<Self> {
        let values = self.values.permute_rows(p)?;
        let n = self.cols();
        let mut mask = Vec::with_capacity(self.mask.len());
        for &src in p.forward() {
            mask.extend_from_slice(&self.mask[src * n..(src + 1) * n]);
        }
        Ok(Self {
            values,
            mask,
            given: self.given,
        })
    }

    pub fn permute_cols(&self, p: &Permutation) -> Result<Self> {
        let values = self.values.permute_cols(p)?;
        let (m, n) = self.shape();
        let fwd = p.forward();
        let mut mask = Vec::with_capacity(self.mask.len());
        for i in 0..m {
            mask.extend(fwd.iter().map(|&src| self.mask[i * n + src]));
        }
        Ok(Self {
            values,
            mask,
            given: self.given,
        })
    }

    /// Masked copy keeping this matrix's values but a different mask.
    pub fn with_mask(&self, mask: Vec<bool>) -> Result<Self> {
        Self::new(self.values.clone(), mask)
    }

    /// Minimum over given entries of each row (or column); `+inf` when empty.
    pub fn given_minima(&self, axis: Axis) -> Vec<f64> {
        let (m, n) = self.shape();
        let mut out = vec![f64::INFINITY; if axis == Axis::Rows { m } else { n }];
        for (i, j, x) in self.iter_given() {
            let slot = match axis {
                Axis::Rows => &mut out[i],
                Axis::Cols => &mut out[j],
            };
            if x < *slot {
                *slot = x;
            }
        }
        out
    }

    /// Mean over given entries of each row; `NaN` for an empty row.
    pub fn given_row_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.rows()];
        let mut counts = vec![0usize; self.rows()];
        for (i, _, x) in self.iter_given() {
            sums[i] += x;
            counts[i] += 1;
        }
        sums.iter()
            .zip(&counts)
            .map(|(&s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_rejects_ragged() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn given_entries_must_be_finite() {
        let v = Matrix::from_rows(&[[1.0, f64::NAN]]).unwrap();
        assert!(MaskedMatrix::new(v.clone(), vec![true, true]).is_err());
        assert!(MaskedMatrix::new(v, vec![true, false]).is_ok());
    }

    #[test]
    fn coverage_detects_empty_row_and_column() {
        let r = MaskedMatrix::from_options(&[[Some(1.0), None], [None, None]]).unwrap();
        let err = r.ensure_coverage().unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
        let r = MaskedMatrix::from_options(&[[Some(1.0), None], [Some(2.0), None]]).unwrap();
        let err = r.ensure_coverage().unwrap_err().to_string();
        assert!(err.contains("column 1"), "{err}");
    }

    #[test]
    fn transpose_twice_is_identity() {
        let r = MaskedMatrix::from_options(&[[Some(1.0), None, Some(3.0)], [Some(4.0), Some(5.0), None]]).unwrap();
        let t = r.transpose();
        assert_eq!(t.shape(), (3, 2));
        assert_eq!(t.get(2, 0), Some(3.0));
        assert_eq!(t.get(2, 1), None);
        assert_eq!(t.transpose(), r);
    }

    #[test]
    fn identity_permutation_leaves_matrix_unchanged() {
        let r = MaskedMatrix::from_options(&[[Some(1.0), None], [Some(4.0), Some(5.0)]]).unwrap();
        let p = Permutation::identity(2);
        assert_eq!(r.permute_rows(&p).unwrap(), r);
        assert_eq!(r.permute_cols(&p).unwrap(), r);
    }

    #[test]
    fn permute_then_restore_via_inverse() {
        let r = MaskedMatrix::from_options(&[
            [Some(1.0), None, Some(3.0)],
            [Some(4.0), Some(5.0), None],
            [None, Some(8.0), Some(9.0)],
        ])
        .unwrap();
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let pr = r.permute_rows(&p).unwrap();
        assert_eq!(pr.get(0, 1), Some(8.0));
        assert_eq!(pr.permute_rows(&p.inverted()).unwrap(), r);
        let pc = r.permute_cols(&p).unwrap();
        assert_eq!(pc.get(0, 0), Some(3.0));
        assert_eq!(pc.permute_cols(&p.inverted()).unwrap(), r);
    }

    #[test]
    fn permutation_length_is_checked() {
        let m = Matrix::zeros(2, 3);
        assert!(m.permute_rows(&Permutation::identity(3)).is_err());
        assert!(m.permute_cols(&Permutation::identity(2)).is_err());
    }
}
