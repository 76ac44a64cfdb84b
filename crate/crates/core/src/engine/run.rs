use std::time::{Duration, Instant};

use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{random_acol_init, Clock, FactorPair, FitState, Orientation, Sample, Trajectory};
use crate::error::{Error, Result};
use crate::masked::MaskedMatrix;

/// Stopping budget. At least one bound must be set; when both are set the
/// run stops at whichever is hit first and the trajectory uses wall-clock
/// time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl Budget {
    pub fn sweeps(n: u64) -> Self {
        Self {
            sweeps: Some(n),
            seconds: None,
        }
    }

    pub fn seconds(s: f64) -> Self {
        Self {
            sweeps: None,
            seconds: Some(s),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.sweeps, self.seconds) {
            (None, None) => Err(Error::InvalidConfig(
                "a sweep budget or a wall-clock budget is required".into(),
            )),
            (_, Some(s)) if !(s > 0.0 && s.is_finite()) => Err(Error::InvalidConfig(format!(
                "wall-clock budget must be positive, got {s}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn clock(&self) -> Clock {
        if self.seconds.is_some() {
            Clock::Seconds
        } else {
            Clock::Sweeps
        }
    }

    /// Budget on the trajectory clock.
    pub fn t_max(&self) -> f64 {
        match (self.seconds, self.sweeps) {
            (Some(s), _) => s,
            (None, Some(n)) => n as f64,
            (None, None) => 0.0,
        }
    }
}

/// Convergence threshold on the per-sweep error decrease.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Epsilon {
    /// Fraction of the error right after initialization.
    Relative(f64),
    Absolute(f64),
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon::Relative(1e-8)
    }
}

impl Epsilon {
    pub fn resolve(&self, initial_error: f64) -> f64 {
        match *self {
            Epsilon::Relative(f) => f * initial_error,
            Epsilon::Absolute(a) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub budget: Budget,
    pub seed: u64,
    #[serde(default)]
    pub epsilon: Epsilon,
    /// Columns averaged per factor column in Random Acol.
    #[serde(default = "default_acol")]
    pub acol_columns: usize,
}

fn default_acol() -> usize {
    super::DEFAULT_ACOL_COLUMNS
}

impl FitConfig {
    pub fn new(budget: Budget, seed: u64) -> Self {
        Self {
            budget,
            seed,
            epsilon: Epsilon::default(),
            acol_columns: super::DEFAULT_ACOL_COLUMNS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if self.acol_columns == 0 {
            return Err(Error::InvalidConfig("acol_columns must be at least 1".into()));
        }
        let eps = match self.epsilon {
            Epsilon::Relative(x) | Epsilon::Absolute(x) => x,
        };
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be a non-negative finite number, got {eps}"
            )));
        }
        Ok(())
    }
}

/// Wall-clock deadline of a run, if it has one.
#[derive(Clone, Copy, Debug)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    #[inline]
    pub fn passed(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

/// Per-run bookkeeping handed to a sweep: the run's RNG, the trajectory
/// recorder and the wall-clock deadline.
pub struct SweepCtx<'r> {
    pub rng: &'r mut ChaCha8Rng,
    pub deadline: Deadline,
    trajectory: &'r mut Trajectory,
    start: Instant,
    sweep: u64,
}

impl SweepCtx<'_> {
    /// Records the error after an accepted update.
    pub fn record(&mut self, error: f64) {
        let seconds = self.start.elapsed().as_secs_f64();
        self.trajectory.push(Sample {
            seconds: Some(seconds),
            sweep: self.sweep,
            error,
        });
    }

    /// True once the wall-clock budget is spent; sweeps poll this between
    /// units of work and return early.
    #[inline]
    pub fn out_of_time(&self) -> bool {
        self.deadline.passed()
    }

    /// 1-based index of the sweep in progress.
    pub fn sweep(&self) -> u64 {
        self.sweep
    }
}

/// A complete fitting method: how to orient the data and what one sweep does.
pub trait FitMethod {
    fn name(&self) -> String;

    /// Transposition/permutation applied before initialization. May draw
    /// from the run's RNG.
    fn orientation(&self, r: &MaskedMatrix, rng: &mut ChaCha8Rng) -> Result<Orientation>;

    /// One pass of the method's outer loop.
    fn sweep(&self, state: &mut FitState<'_>, ctx: &mut SweepCtx<'_>) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    SweepBudget,
    TimeBudget,
    ExactFit,
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    /// Factors in the caller's orientation.
    pub factors: FactorPair,
    /// Factors as fitted, with the orientation that maps back.
    pub fitted: FactorPair,
    pub trajectory: Trajectory,
    pub sweeps: u64,
    pub stop: StopReason,
    pub trials: u64,
    pub accepted: u64,
}

impl FitOutcome {
    pub fn final_error(&self) -> f64 {
        self.trajectory.final_error().unwrap_or(f64::NAN)
    }
}

/// Runs `method` on `r` at the given rank until convergence or budget.
pub fn run_fit(r: &MaskedMatrix, rank: usize, method: &dyn FitMethod, config: &FitConfig) -> Result<FitOutcome> {
    config.validate()?;
    if rank < 1 {
        return Err(Error::InvalidConfig("rank must be at least 1".into()));
    }
    r.ensure_coverage()?;

    let start = Instant::now();
    let deadline = Deadline(config.budget.seconds.map(|s| start + Duration::from_secs_f64(s)));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let orientation = method.orientation(r, &mut rng)?;
    let data = orientation.apply(r)?;
    let (u, v) = random_acol_init(&data, rank, config.acol_columns, &mut rng)?;
    let mut state = FitState::new(&data, u, v)?;

    let mut trajectory = Trajectory::new(config.budget.clock(), config.budget.t_max());
    trajectory.push(Sample {
        seconds: Some(start.elapsed().as_secs_f64()),
        sweep: 0,
        error: state.error(),
    });
    let eps = config.epsilon.resolve(state.error());
    debug!(
        "{}: {}x{} rank {rank}, initial error {}, epsilon {eps}",
        method.name(),
        data.rows(),
        data.cols(),
        state.error()
    );

    let mut sweeps = 0u64;
    let stop = loop {
        if state.error() == 0.0 {
            break StopReason::ExactFit;
        }
        if config.budget.sweeps.is_some_and(|n| sweeps >= n) {
            break StopReason::SweepBudget;
        }
        if deadline.passed() {
            break StopReason::TimeBudget;
        }
        let before = state.error();
        let mut ctx = SweepCtx {
            rng: &mut rng,
            trajectory: &mut trajectory,
            start,
            deadline,
            sweep: sweeps + 1,
        };
        method.sweep(&mut state, &mut ctx)?;
        let timed_out = deadline.passed();
        sweeps += 1;
        trajectory.push(Sample {
            seconds: Some(start.elapsed().as_secs_f64()),
            sweep: sweeps,
            error: state.error(),
        });
        if timed_out {
            break StopReason::TimeBudget;
        }
        if before - state.error() < eps {
            break StopReason::Converged;
        }
    };
    debug!(
        "{}: stopped ({stop:?}) after {sweeps} sweeps, error {}",
        method.name(),
        state.error()
    );

    let (trials, accepted) = (state.trials(), state.accepted());
    let (u, v) = state.into_factors();
    let fitted = FactorPair { u, v, orientation };
    let factors = fitted.restore()?;
    Ok(FitOutcome {
        factors,
        fitted,
        trajectory,
        sweeps,
        stop,
        trials,
        accepted,
    })
}
