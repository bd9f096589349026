//! Post-harvest orbits of the delayed impulsive system.
//!
//! Sampling just after each harvest gives `x_n = N(nT^+)`, which obeys
//!
//! ```text
//! x_{n+1} = max{ F(x_n) - E F(x_{n-k}), 0 }        n >= k
//! x_{i+1} = max{ F(x_i) - E N((i-k+1)T), 0 }       i = 0..k-1
//! ```
//!
//! where `F` is the one-period logistic flow and the first `k` deductions come
//! from the recorded pre-harvest history.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{require, HarvestError, Result};
use crate::model::{grow, InitialData, ModelParams};

/// When to stop iterating an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoppingRule {
    /// Relative step-to-step tolerance `|x_{n+1} - x_n| / x_n`.
    pub rel_tol: f64,
    /// Number of successive steps the tolerance must hold.
    pub consecutive_hits: usize,
    /// Horizon in periods.
    pub max_periods: usize,
    /// `x_n <= extinction_threshold` counts as extinct.
    pub extinction_threshold: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            consecutive_hits: 5,
            max_periods: 100,
            extinction_threshold: 0.0,
        }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        require(self.rel_tol > 0.0, "rel_tol", self.rel_tol, "must be positive")?;
        require(
            self.consecutive_hits >= 1,
            "consecutive_hits",
            self.consecutive_hits as f64,
            "must be at least 1",
        )?;
        require(
            self.max_periods >= 1,
            "max_periods",
            self.max_periods as f64,
            "must be at least 1",
        )?;
        require(
            self.extinction_threshold >= 0.0,
            "extinction_threshold",
            self.extinction_threshold,
            "must be non-negative",
        )
    }
}

/// How an orbit terminated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// `x_step` was the first value at or below the extinction threshold.
    Extinct {
        step: usize,
    },
    /// The tolerance held for the required number of steps ending at `step`;
    /// `limit` is the last iterate.
    Converged {
        limit: f64,
        step: usize,
    },
    HorizonReached,
}

/// The post-harvest sequence `x_0, x_1, ...` and how it ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    values: Vec<f64>,
    outcome: Outcome,
    params: ModelParams,
}

impl Orbit {
    pub fn from_parts(values: Vec<f64>, outcome: Outcome, params: ModelParams) -> Self {
        Self {
            values,
            outcome,
            params,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

#[inline]
fn harvest(pre_harvest: f64, deduction: f64, effort: f64) -> f64 {
    (pre_harvest - effort * deduction).max(0.0)
}

/// One step of the recurrence: `max{F(x_n) - E F(x_lag), 0}`.
pub fn step(p: &ModelParams, x_n: f64, x_lag: f64) -> f64 {
    let a = p.growth_factor();
    harvest(grow(x_n, a, p.capacity()), grow(x_lag, a, p.capacity()), p.effort())
}

/// Infinite iterator over `x_0, x_1, ...` for given parameters and initial data.
#[derive(Debug, Clone)]
pub struct PostHarvestSeries {
    growth: f64,
    capacity: f64,
    effort: f64,
    delay: usize,
    history: Vec<f64>,
    /// The last `delay + 1` values, oldest first.
    recent: VecDeque<f64>,
    next_index: usize,
    x0: f64,
}

impl PostHarvestSeries {
    pub fn new(p: &ModelParams, init: &InitialData) -> Result<Self> {
        let k = p.delay();
        if init.history().len() != k {
            return Err(HarvestError::HistoryLength {
                expected: k,
                got: init.history().len(),
            });
        }
        Ok(Self {
            growth: p.growth_factor(),
            capacity: p.capacity(),
            effort: p.effort(),
            delay: k,
            history: init.history().to_vec(),
            recent: VecDeque::with_capacity(k + 2),
            next_index: 0,
            x0: init.n0_plus(),
        })
    }
}

impl Iterator for PostHarvestSeries {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let x = if self.next_index == 0 {
            self.x0
        } else {
            let i = self.next_index - 1;
            let x_i = *self.recent.back().expect("x_i is stored");
            let deduction = if i < self.delay {
                self.history[self.delay - 1 - i]
            } else {
                grow(
                    *self.recent.front().expect("x_{i-k} is stored"),
                    self.growth,
                    self.capacity,
                )
            };
            harvest(grow(x_i, self.growth, self.capacity), deduction, self.effort)
        };
        self.recent.push_back(x);
        if self.recent.len() > self.delay + 1 {
            self.recent.pop_front();
        }
        self.next_index += 1;
        Some(x)
    }
}

/// `x_0 ..= x_k`: the start value and the `k` values driven by the history.
pub fn seed_orbit(p: &ModelParams, init: &InitialData) -> Result<Vec<f64>> {
    Ok(PostHarvestSeries::new(p, init)?.take(p.delay() + 1).collect())
}

/// Iterates the recurrence until `rule` fires.
pub fn iterate(p: &ModelParams, init: &InitialData, rule: &StoppingRule) -> Result<Orbit> {
    rule.validate()?;
    let series = PostHarvestSeries::new(p, init)?;
    let mut values: Vec<f64> = Vec::with_capacity(rule.max_periods.min(1 << 16) + 1);
    let mut hits = 0usize;
    let mut outcome = Outcome::HorizonReached;
    for (n, x) in series.enumerate() {
        values.push(x);
        if x <= rule.extinction_threshold {
            outcome = Outcome::Extinct { step: n };
            break;
        }
        if n >= 1 {
            let prev = values[n - 1];
            if (x - prev).abs() / prev < rule.rel_tol {
                hits += 1;
            } else {
                hits = 0;
            }
            if hits >= rule.consecutive_hits {
                outcome = Outcome::Converged { limit: x, step: n };
                break;
            }
        }
        if n >= rule.max_periods {
            break;
        }
    }
    Ok(Orbit {
        values,
        outcome,
        params: *p,
    })
}

/// A sample of the continuous solution `N(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub value: f64,
    /// True for `N(nT^+)` rows; false for samples of the flow, including the
    /// left limit `N((n+1)T)` just before a harvest.
    pub post_impulse: bool,
}

/// Reconstructs `N(t)` from an orbit.
///
/// Emits `(0, x_0)`, then for each period `n` the flow samples at
/// `nT + jT/m` for `j = 1..=m` (the last one is the pre-harvest left limit),
/// followed by the post-harvest value `x_{n+1}` at the same instant.
pub fn continuous_trajectory(orbit: &Orbit, samples_per_period: usize) -> Result<Vec<TrajectoryPoint>> {
    require(
        samples_per_period >= 1,
        "samples_per_period",
        samples_per_period as f64,
        "must be at least 1",
    )?;
    let values = orbit.values();
    let (&x0, rest) = values.split_first().ok_or(HarvestError::EmptyOrbit)?;
    let p = orbit.params();
    let period = p.period();
    let m = samples_per_period as f64;
    let mut out = Vec::with_capacity(values.len() * (samples_per_period + 1));
    out.push(TrajectoryPoint {
        t: 0.0,
        value: x0,
        post_impulse: true,
    });
    for (n, (&start, &next)) in values.iter().zip(rest).enumerate() {
        let base = n as f64 * period;
        for j in 1..=samples_per_period {
            let dt = period * (j as f64 / m);
            out.push(TrajectoryPoint {
                t: base + dt,
                value: grow(start, (p.r() * dt).exp(), p.capacity()),
                post_impulse: false,
            });
        }
        out.push(TrajectoryPoint {
            t: (n + 1) as f64 * period,
            value: next,
            post_impulse: true,
        });
    }
    Ok(out)
}
