//! Seeded synthetic data: mixtures of tropical and standard low-rank
//! products, and uniform masking of a held-out test set.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masked::{trop_matmul, MaskedMatrix, Matrix};

const MASK_REDRAWS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub m: usize,
    pub n: usize,
    #[serde(default = "default_true_rank")]
    pub true_rank: usize,
    /// Weight of the tropical product; `0` is purely linear.
    pub lambda: f64,
    pub seed: u64,
    #[serde(default)]
    pub mask_fraction: f64,
}

fn default_true_rank() -> usize {
    3
}

impl SynthSpec {
    pub fn new(m: usize, n: usize, lambda: f64, seed: u64) -> Self {
        Self {
            m,
            n,
            true_rank: 3,
            lambda,
            seed,
            mask_fraction: 0.0,
        }
    }

    pub fn with_mask(mut self, fraction: f64) -> Self {
        self.mask_fraction = fraction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.true_rank == 0 || self.m < self.true_rank || self.n < self.true_rank {
            return Err(Error::InvalidConfig(format!(
                "{}x{} cannot hold rank {}",
                self.m, self.n, self.true_rank
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig(format!("lambda {} not in [0, 1]", self.lambda)));
        }
        check_fraction(self.mask_fraction)
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("mask fraction {f} not in [0, 1)")))
    }
}

/// Generated matrix with its ground-truth factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    pub r: Matrix,
    pub a: Matrix,
    pub b: Matrix,
}

fn standard_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).fold(0.0, |s, k| s + a[(i, k)] * b[(k, j)])
    })
}

/// `R = λ(A ⊗ B) + (1 − λ)(A · B)` with `A` (m×r) and `B` (r×n) drawn
/// i.i.d. from `Uniform[0, 1)`, `A` first, both row-major.
pub fn gen_mixture(spec: &SynthSpec) -> Result<Mixture> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = Matrix::from_fn(spec.m, spec.true_rank, |_, _| rng.gen::<f64>());
    let b = Matrix::from_fn(spec.true_rank, spec.n, |_, _| rng.gen::<f64>());
    let trop = trop_matmul(&a, &b)?;
    let lin = standard_matmul(&a, &b);
    let lambda = spec.lambda;
    let r = Matrix::from_fn(spec.m, spec.n, |i, j| {
        lambda * trop[(i, j)] + (1.0 - lambda) * lin[(i, j)]
    });
    Ok(Mixture { r, a, b })
}

/// Hides `⌊fraction · given⌋` of the given entries of `r`, uniformly without
/// replacement, re-drawing until every row and column keeps a given entry.
/// Returns the training matrix and the test mask (true = held out).
pub fn apply_mask(r: &MaskedMatrix, fraction: f64, seed: u64) -> Result<(MaskedMatrix, Vec<bool>)> {
    check_fraction(fraction)?;
    r.ensure_coverage()?;
    let (m, n) = r.shape();
    let given: Vec<usize> = (0..m * n).filter(|&p| r.mask()[p]).collect();
    let hidden = (fraction * given.len() as f64).floor() as usize;
    let unmaskable = Error::Unmaskable {
        hidden,
        total: given.len(),
    };
    if hidden == 0 {
        return Ok((r.clone(), vec![false; m * n]));
    }
    if given.len() - hidden < m.max(n) {
        return Err(unmaskable);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    for _ in 0..MASK_REDRAWS {
        let mut test = vec![false; m * n];
        for p in index::sample(&mut rng, given.len(), hidden) {
            test[given[p]] = true;
        }
        let train_mask: Vec<bool> = r.mask().iter().zip(&test).map(|(&g, &t)| g && !t).collect();
        let train = r.with_mask(train_mask)?;
        if train.ensure_coverage().is_ok() {
            return Ok((train, test));
        }
    }
    Err(unmaskable)
}

/// A generated dataset and its transpose, as `(tall, wide)`; `m × n` is the
/// tall shape.
pub fn gen_tall_wide_pair(spec: &SynthSpec) -> Result<(Matrix, Matrix)> {
    let tall = gen_mixture(spec)?.r;
    let wide = tall.transpose();
    Ok((tall, wide))
}
