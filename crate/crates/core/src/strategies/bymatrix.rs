use rand::Rng;

use super::select::Scores;
use crate::engine::{FitState, SweepCtx, UpdateRule};
use crate::error::Result;

/// All given `(i, j)` ordered by `td_row(i) + td_col(j) − td(i, j)`,
/// largest first, ties in row-major order.
pub fn bymatrix_candidates(state: &FitState<'_>) -> Vec<(usize, usize, f64)> {
    let scores = Scores::compute(state);
    let mut cands: Vec<(usize, usize, f64)> = state
        .data()
        .iter_given()
        .map(|(i, j, _)| {
            let d = state.td(i, j).expect("given entry");
            (i, j, scores.row_td[i] + scores.col_td[j] - d)
        })
        .collect();
    cands.sort_by(|a, b| b.2.total_cmp(&a.2));
    cands
}

fn step<G: Rng + ?Sized>(state: &mut FitState<'_>, rng: &mut G, mut stop: impl FnMut() -> bool) -> Result<bool> {
    for (i, j, _) in bymatrix_candidates(state) {
        if stop() {
            break;
        }
        let k = state.argmax(i, j);
        let rule = if rng.gen::<f64>() < 0.5 {
            UpdateRule::Ulf
        } else {
            UpdateRule::Urf
        };
        if state.try_update(rule, i, j, k)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// One ByMatrix step: candidates in decreasing combined-distance order,
/// `k = f(i, j)`, and a fair coin choosing F-ULF or F-URF for each try.
/// Stops at the first strict decrease.
pub fn bymatrix_step<G: Rng + ?Sized>(state: &mut FitState<'_>, rng: &mut G) -> Result<bool> {
    step(state, rng, || false)
}

pub(crate) fn sweep_matrix(state: &mut FitState<'_>, ctx: &mut SweepCtx<'_>) -> Result<()> {
    let deadline = ctx.deadline;
    if step(state, ctx.rng, || deadline.passed())? {
        ctx.record(state.error());
    }
    Ok(())
}
