use rand_chacha::ChaCha8Rng;

use super::{run_fit, FitConfig, FitMethod, FitOutcome, FitState, Orientation, SweepCtx, UpdateRule};
use crate::error::Result;
use crate::masked::{sort_perm_by_min, Axis, MaskedMatrix};

/// The original STMF update scheme: columns sorted ascending by minimum,
/// then every given element visited in row-major order, trying each `k`
/// with the ULF rule and, failing that, each `k` with the URF rule. Updates
/// use whole-matrix residuation, as the original ULF/URF do.
#[derive(Clone, Copy, Debug, Default)]
pub struct StmfBaseline;

impl FitMethod for StmfBaseline {
    fn name(&self) -> String {
        "STMF".into()
    }

    fn orientation(&self, r: &MaskedMatrix, _rng: &mut ChaCha8Rng) -> Result<Orientation> {
        Ok(Orientation {
            transposed: false,
            row_perm: None,
            col_perm: Some(sort_perm_by_min(r, Axis::Cols)),
        })
    }

    fn sweep(&self, state: &mut FitState<'_>, ctx: &mut SweepCtx<'_>) -> Result<()> {
        let data = state.data();
        let rank = state.rank();
        for (i, j, _) in data.iter_given() {
            if ctx.out_of_time() {
                break;
            }
            'rules: for rule in [UpdateRule::Ulf, UpdateRule::Urf] {
                for k in 0..rank {
                    if state.try_update_whole(rule, i, j, k)? {
                        ctx.record(state.error());
                        break 'rules;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Fits `r` with the original STMF scheme.
pub fn stmf_baseline(r: &MaskedMatrix, rank: usize, config: &FitConfig) -> Result<FitOutcome> {
    run_fit(r, rank, &StmfBaseline, config)
}
