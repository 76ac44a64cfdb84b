//! Shared fixtures for the benchmarks.

use tropfact_core::datagen::{apply_mask, gen_mixture, SynthSpec};
use tropfact_core::MaskedMatrix;

/// Seeded `m × n` rank-3 mixture with 20% of entries held out.
pub fn masked_dataset(m: usize, n: usize, lambda: f64, seed: u64) -> MaskedMatrix {
    let mx = gen_mixture(&SynthSpec::new(m, n, lambda, seed)).expect("valid spec");
    let full = MaskedMatrix::full(mx.r).expect("finite data");
    apply_mask(&full, 0.2, seed).expect("maskable").0
}
