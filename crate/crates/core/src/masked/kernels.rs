use super::{MaskedMatrix, Matrix};
use crate::error::{Error, Result};

/// Max-plus product: `out[i, j] = max_k a[i, k] + b[k, j]`.
pub fn trop_matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "max-plus product of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, p, n) = (a.rows(), a.cols(), b.cols());
    let mut out = Matrix::filled(m, n, f64::NEG_INFINITY);
    for i in 0..m {
        let arow = a.row(i);
        let orow = out.row_mut(i);
        for (k, &aik) in arow.iter().enumerate().take(p) {
            if aik == f64::NEG_INFINITY {
                continue;
            }
            for (o, &bkj) in orow.iter_mut().zip(b.row(k)) {
                let s = aik + bkj;
                if s > *o {
                    *o = s;
                }
            }
        }
    }
    Ok(out)
}

/// Min-plus product over pairs where both operands are given:
/// `out[i, j] = min { a[i, k] + b[k, j] : a[i, k], b[k, j] given }`.
///
/// An empty feasible set yields `+inf`.
pub fn masked_minplus(a: &MaskedMatrix, b: &MaskedMatrix) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "min-plus product of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, p, n) = (a.rows(), a.cols(), b.cols());
    let mut out = Matrix::filled(m, n, f64::INFINITY);
    for i in 0..m {
        for k in 0..p {
            let Some(aik) = a.get(i, k) else { continue };
            for j in 0..n {
                if let Some(bkj) = b.get(k, j) {
                    let s = aik + bkj;
                    if s < out[(i, j)] {
                        out[(i, j)] = s;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Row `k` of `(-U)ᵀ ⊗* R`: `out[j] = min_i R[i, j] - U[i, k]` over given `R[i, j]`.
pub fn residuate_row(r: &MaskedMatrix, u: &Matrix, k: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), r.cols());
    debug_assert_eq!(u.rows(), r.rows());
    out.fill(f64::INFINITY);
    let n = r.cols();
    let (vals, mask) = (r.values().as_slice(), r.mask());
    for i in 0..r.rows() {
        let uik = u[(i, k)];
        let base = i * n;
        for j in 0..n {
            if mask[base + j] {
                let s = vals[base + j] - uik;
                if s < out[j] {
                    out[j] = s;
                }
            }
        }
    }
}

/// Column `k` of `R ⊗* (-V)ᵀ`: `out[i] = min_j R[i, j] - V[k, j]` over given `R[i, j]`.
pub fn residuate_col(r: &MaskedMatrix, v: &Matrix, k: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), r.rows());
    debug_assert_eq!(v.cols(), r.cols());
    let n = r.cols();
    let vk = v.row(k);
    let (vals, mask) = (r.values().as_slice(), r.mask());
    for (i, o) in out.iter_mut().enumerate() {
        let base = i * n;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if mask[base + j] {
                let s = vals[base + j] - vk[j];
                if s < best {
                    best = s;
                }
            }
        }
        *o = best;
    }
}

/// Sum of absolute values over given entries.
pub fn b_norm(w: &MaskedMatrix) -> f64 {
    w.iter_given().fold(0.0, |acc, (_, _, x)| acc + x.abs())
}

fn check_factor_shapes(r: &MaskedMatrix, u: &Matrix, v: &Matrix) -> Result<()> {
    if u.rows() != r.rows() || v.cols() != r.cols() || u.cols() != v.rows() {
        return Err(Error::DimensionMismatch(format!(
            "factors {}x{} and {}x{} for a {}x{} matrix",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols(),
            r.rows(),
            r.cols()
        )));
    }
    Ok(())
}

/// `(U ⊗ V)[i, j]` together with the smallest index attaining the maximum.
#[inline]
pub(crate) fn trop_entry(u: &Matrix, v: &Matrix, i: usize, j: usize) -> (f64, usize) {
    let urow = u.row(i);
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (l, &uil) in urow.iter().enumerate() {
        let s = uil + v[(l, j)];
        if s > best {
            best = s;
            arg = l;
        }
    }
    (best, arg)
}

/// `‖R − U ⊗ V‖_b` restricted to the given entries of `R`.
pub fn approx_error(r: &MaskedMatrix, u: &Matrix, v: &Matrix) -> Result<f64> {
    check_factor_shapes(r, u, v)?;
    Ok(r.iter_given()
        .fold(0.0, |acc, (i, j, x)| acc + (x - trop_entry(u, v, i, j).0).abs()))
}

/// Tropical distance `|R[i, j] − (U ⊗ V)[i, j]|` at a given entry.
pub fn td(r: &MaskedMatrix, u: &Matrix, v: &Matrix, i: usize, j: usize) -> Result<f64> {
    let x = r.given(i, j)?;
    Ok((x - trop_entry(u, v, i, j).0).abs())
}

/// Smallest `k` maximizing `U[i, k] + V[k, j]`.
pub fn argmax_k(u: &Matrix, v: &Matrix, i: usize, j: usize) -> usize {
    trop_entry(u, v, i, j).1
}

/// Sum of tropical distances over the given entries of row `i`.
pub fn td_row(r: &MaskedMatrix, u: &Matrix, v: &Matrix, i: usize) -> f64 {
    (0..r.cols())
        .filter_map(|t| r.get(i, t).map(|x| (x - trop_entry(u, v, i, t).0).abs()))
        .fold(0.0, |acc, d| acc + d)
}

/// Sum of tropical distances over the given entries of column `j`.
pub fn td_col(r: &MaskedMatrix, u: &Matrix, v: &Matrix, j: usize) -> f64 {
    (0..r.rows())
        .filter_map(|t| r.get(t, j).map(|x| (x - trop_entry(u, v, t, j).0).abs()))
        .fold(0.0, |acc, d| acc + d)
}
