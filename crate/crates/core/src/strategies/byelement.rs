use crate::engine::{FitState, SweepCtx, UpdateRule};
use crate::error::Result;

/// Counters from one ByElement sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ElementSweepStats {
    /// Given entries visited.
    pub visited: usize,
    /// Entries with a nonzero tropical distance, i.e. where an update was tried.
    pub attempted: usize,
    pub accepted: usize,
}

fn element_pass(
    state: &mut FitState<'_>,
    mut on_accept: impl FnMut(f64),
    mut stop: impl FnMut() -> bool,
) -> Result<ElementSweepStats> {
    let data = state.data();
    let mut stats = ElementSweepStats::default();
    for (i, j, _) in data.iter_given() {
        if stop() {
            break;
        }
        stats.visited += 1;
        if state.td(i, j) == Some(0.0) {
            continue;
        }
        stats.attempted += 1;
        let k = state.argmax(i, j);
        if state.try_update(UpdateRule::Ulf, i, j, k)? || state.try_update(UpdateRule::Urf, i, j, k)? {
            stats.accepted += 1;
            on_accept(state.error());
        }
    }
    Ok(stats)
}

/// One pass over the given entries in row-major order. Entries already
/// fitted exactly are skipped; otherwise `k = f(i, j)` and F-ULF then
/// F-URF are tried, keeping the first strict decrease.
pub fn byelement_sweep(state: &mut FitState<'_>) -> Result<ElementSweepStats> {
    element_pass(state, |_| {}, || false)
}

pub(crate) fn sweep_elements(state: &mut FitState<'_>, ctx: &mut SweepCtx<'_>) -> Result<ElementSweepStats> {
    let deadline = ctx.deadline;
    element_pass(state, |e| ctx.record(e), || deadline.passed())
}
