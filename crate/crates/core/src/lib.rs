//! Tropical (max-plus) matrix factorization for matrix completion.
//!
//! Given a partially observed matrix `R`, find a coefficient factor `U`
//! (m×r) and a basis factor `V` (r×n) such that `R ≈ U ⊗ V`, where
//! `(U ⊗ V)[i, j] = max_k U[i, k] + V[k, j]`, minimizing the sum of absolute
//! errors over the observed entries.
//!
//! - [`masked`]: dense matrices with a missing-entry mask and the max-plus /
//!   masked min-plus kernels.
//! - [`engine`]: single-index F-ULF/F-URF updates, Random Acol
//!   initialization, the fitting loop, and the original STMF scheme.
//! - [`strategies`]: ByRow, ByElement and ByMatrix update strategies,
//!   including FastSTMF.
//! - [`datagen`]: seeded synthetic tropical/linear mixtures and masking.
//! - [`metrics`]: normalized error, RMSE, distance correlation, bootstrap
//!   intervals, rankings and critical differences.
//! - [`io`]: CSV and JSON-lines readers and writers.

pub mod datagen;
pub mod engine;
pub mod error;
pub mod io;
pub mod masked;
pub mod metrics;
pub mod strategies;

pub use engine::{
    run_fit, stmf_baseline, Budget, Clock, Epsilon, FactorPair, FitConfig, FitOutcome, FitState, Orientation,
    Trajectory, UpdateOutcome, UpdateRule,
};
pub use error::{Error, Result};
pub use masked::{Axis, MaskedMatrix, Matrix, Permutation};
pub use strategies::{fast_stmf, Method, StrategySpec};
