use serde::{Deserialize, Serialize};

use crate::engine::Trajectory;
use crate::error::{Error, Result};

/// `t_0 = 0, step, 2·step, …` up to and including `t_max`.
pub fn regular_grid(t_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidInput(format!("bad grid: t_max {t_max}, step {step}")));
    }
    let count = (t_max / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
    if grid.last().is_some_and(|&t| t < t_max) {
        grid.push(t_max);
    }
    Ok(grid)
}

/// Step-interpolated errors of `traj` at each grid time.
pub fn grid_values(traj: &Trajectory, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&t| {
            traj.value_at(t)
                .ok_or_else(|| Error::InvalidInput("empty trajectory".into()))
        })
        .collect()
}

/// `(e − γ_max) / (γ_init − γ_max)` for each value.
pub fn normalized_values(values: &[f64], gamma_init: f64, gamma_max: f64) -> Result<Vec<f64>> {
    let span = gamma_init - gamma_max;
    if span == 0.0 || !span.is_finite() {
        return Err(Error::DegenerateBaseline(gamma_init));
    }
    Ok(values.iter().map(|e| (e - gamma_max) / span).collect())
}

/// NE of `traj` on `grid` relative to `baseline`, whose errors at the first
/// and last grid times define the scale.
pub fn normalized_error(traj: &Trajectory, baseline: &Trajectory, grid: &[f64]) -> Result<Vec<f64>> {
    let (first, last) = match (grid.first(), grid.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidInput("empty grid".into())),
    };
    let base = grid_values(baseline, &[first, last])?;
    normalized_values(&grid_values(traj, grid)?, base[0], base[1])
}

/// Time at which a target error is first met.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reach {
    At(f64),
    Never,
}

impl Reach {
    /// Sort key: "never" after every finite time.
    pub fn score(&self) -> f64 {
        match *self {
            Reach::At(t) => t,
            Reach::Never => f64::INFINITY,
        }
    }
}

/// Earliest grid time whose value is at or below `target`.
pub fn time_to_reach_curve(grid: &[f64], values: &[f64], target: f64) -> Reach {
    grid.iter()
        .zip(values)
        .find(|(_, &v)| v <= target)
        .map_or(Reach::Never, |(&t, _)| Reach::At(t))
}

pub fn time_to_reach(traj: &Trajectory, grid: &[f64], target: f64) -> Result<Reach> {
    Ok(time_to_reach_curve(grid, &grid_values(traj, grid)?, target))
}
