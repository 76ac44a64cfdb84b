use serde::{Deserialize, Serialize};

/// Which axis a trajectory is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// Wall-clock seconds since the run started.
    Seconds,
    /// Completed sweeps.
    Sweeps,
}

/// One recorded point of a fitting run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(rename = "t_seconds", default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    #[serde(default)]
    pub sweep: u64,
    #[serde(rename = "b_norm_error")]
    pub error: f64,
}

/// Time-stamped approximation errors of one run.
///
/// The first sample is taken right after initialization; `t_init` is its
/// clock value. `t_max` is the budget on the same clock.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub clock: Clock,
    pub t_init: f64,
    pub t_max: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(clock: Clock, t_max: f64) -> Self {
        Self {
            clock,
            t_init: 0.0,
            t_max,
            samples: Vec::new(),
        }
    }

    /// Builds a trajectory from `(time, error)` pairs on the given clock.
    pub fn from_points(clock: Clock, t_max: f64, points: &[(f64, f64)]) -> Self {
        let samples = points
            .iter()
            .map(|&(t, error)| match clock {
                Clock::Seconds => Sample {
                    seconds: Some(t),
                    sweep: 0,
                    error,
                },
                Clock::Sweeps => Sample {
                    seconds: None,
                    sweep: t as u64,
                    error,
                },
            })
            .collect();
        let t_init = points.first().map_or(0.0, |p| p.0);
        Self {
            clock,
            t_init,
            t_max,
            samples,
        }
    }

    pub fn push(&mut self, sample: Sample) {
        if self.samples.is_empty() {
            self.t_init = self.time_of(&sample);
        }
        self.samples.push(sample);
    }

    /// Clock value of a sample.
    #[inline]
    pub fn time_of(&self, s: &Sample) -> f64 {
        match self.clock {
            Clock::Seconds => s.seconds.unwrap_or(0.0),
            Clock::Sweeps => s.sweep as f64,
        }
    }

    pub fn initial_error(&self) -> Option<f64> {
        self.samples.first().map(|s| s.error)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.samples.last().map(|s| s.error)
    }

    /// Step interpolation: error of the last sample at or before `t`; before
    /// the first sample, the first sample's error.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let first = self.samples.first()?;
        let idx = self.samples.partition_point(|s| self.time_of(s) <= t);
        Some(if idx == 0 {
            first.error
        } else {
            self.samples[idx - 1].error
        })
    }

    /// Earliest sample time at which the error is at or below `target`.
    pub fn first_time_at_or_below(&self, target: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.error <= target).map(|s| self.time_of(s))
    }

    pub fn is_monotone(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].error <= w[0].error && self.time_of(&w[1]) >= self.time_of(&w[0]))
    }

    /// Copy with wall-clock stamps removed, leaving only sweep counts.
    pub fn without_wall_clock(&self) -> Self {
        let mut t = self.clone();
        for s in &mut t.samples {
            s.seconds = None;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_interpolation() {
        let t = Trajectory::from_points(Clock::Seconds, 10.0, &[(0.5, 9.0), (2.0, 5.0), (7.0, 1.0)]);
        assert_eq!(t.t_init, 0.5);
        assert_eq!(t.value_at(0.0), Some(9.0));
        assert_eq!(t.value_at(0.5), Some(9.0));
        assert_eq!(t.value_at(1.99), Some(9.0));
        assert_eq!(t.value_at(2.0), Some(5.0));
        assert_eq!(t.value_at(100.0), Some(1.0));
        assert_eq!(t.first_time_at_or_below(5.0), Some(2.0));
        assert_eq!(t.first_time_at_or_below(0.5), None);
        assert!(t.is_monotone());
    }

    #[test]
    fn empty_trajectory_has_no_values() {
        let t = Trajectory::new(Clock::Sweeps, 3.0);
        assert_eq!(t.value_at(1.0), None);
        assert_eq!(t.final_error(), None);
    }

    #[test]
    fn sample_json_shape() {
        let s = Sample {
            seconds: Some(1.5),
            sweep: 2,
            error: 0.25,
        };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"t_seconds":1.5,"sweep":2,"b_norm_error":0.25}"#
        );
        let s = Sample { seconds: None, ..s };
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"sweep":2,"b_norm_error":0.25}"#);
    }
}
