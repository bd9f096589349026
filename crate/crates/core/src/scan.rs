//! Batch experiments: basin-of-attraction scans, stability-region sweeps and
//! the table of MSY bounds `f(k)`.
//!
//! Samples and grid cells are evaluated in parallel; outputs always follow
//! the deterministic enumeration order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require, Result};
use crate::model::{InitialData, ModelParams};
use crate::orbit::PostHarvestSeries;
use crate::stability::{classify, positive_equilibrium, StabilityClass, DEFAULT_BOUNDARY_TOL};
use crate::yields::{msy_rt_bound, optimal_effort};

/// Generator used for basin sampling, recorded in scan metadata.
pub const RNG_FAMILY: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

/// When a start counts as surviving or extinct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurvivalRule {
    pub iterations: usize,
    /// Survival window is `x* +- window_halfwidth` (absolute population units).
    pub window_halfwidth: f64,
    pub extinction_threshold: f64,
    /// Upper end of the sampling cube; `None` means `2 K_c`.
    pub domain_max: Option<f64>,
}

impl Default for SurvivalRule {
    fn default() -> Self {
        Self {
            iterations: 10_500,
            window_halfwidth: 10.0,
            extinction_threshold: 1e-3,
            domain_max: None,
        }
    }
}

impl SurvivalRule {
    pub fn validate(&self) -> Result<()> {
        require(
            self.iterations >= 1,
            "iterations",
            self.iterations as f64,
            "must be positive",
        )?;
        require(
            self.window_halfwidth > 0.0,
            "window_halfwidth",
            self.window_halfwidth,
            "must be positive",
        )?;
        require(
            self.extinction_threshold > 0.0,
            "extinction_threshold",
            self.extinction_threshold,
            "must be positive",
        )?;
        if let Some(d) = self.domain_max {
            require(d > 0.0 && d.is_finite(), "domain_max", d, "must be positive")?;
        }
        Ok(())
    }

    pub fn domain_max_for(&self, p: &ModelParams) -> f64 {
        self.domain_max.unwrap_or(2.0 * p.capacity())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinOutcome {
    /// Inside the survival window after the full run.
    Survived,
    /// Fell below the extinction threshold at some point.
    Extinct,
    /// Neither: alive but outside the window at the horizon.
    Indeterminate,
}

impl std::fmt::Display for BasinOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasinOutcome::Survived => "survived",
            BasinOutcome::Extinct => "extinct",
            BasinOutcome::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinSample {
    pub initial: InitialData,
    pub outcome: BasinOutcome,
    /// Index of the last post-harvest value examined.
    pub steps_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinMetadata {
    pub seed: u64,
    pub rng: String,
    pub params: ModelParams,
    pub rule: SurvivalRule,
    pub domain_max: f64,
    pub x_star: f64,
    pub n_samples: usize,
    /// True when the start cube has a dimension other than the planar
    /// `(N(0), N(0^+))` case `k = 1`.
    pub extended_sampling: bool,
    pub survived: usize,
    pub extinct: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinScan {
    pub samples: Vec<BasinSample>,
    pub metadata: BasinMetadata,
}

/// Runs one start under `rule` and labels it.
pub fn classify_start(p: &ModelParams, x_star: f64, init: &InitialData, rule: &SurvivalRule) -> Result<BasinSample> {
    let mut last = init.n0_plus();
    let mut steps_run = 0;
    for (n, x) in PostHarvestSeries::new(p, init)?.take(rule.iterations + 1).enumerate() {
        steps_run = n;
        last = x;
        if x < rule.extinction_threshold {
            return Ok(BasinSample {
                initial: init.clone(),
                outcome: BasinOutcome::Extinct,
                steps_run,
            });
        }
    }
    let outcome = if (last - x_star).abs() <= rule.window_halfwidth {
        BasinOutcome::Survived
    } else {
        BasinOutcome::Indeterminate
    };
    Ok(BasinSample {
        initial: init.clone(),
        outcome,
        steps_run,
    })
}

/// Draws `n_samples` starts uniformly from `[0, domain_max]^(k+1)` and
/// classifies each.
///
/// Each sample draws the history `N(0), N(-T), ...` first and then `N(0^+)`.
pub fn basin_scan(p: &ModelParams, rule: &SurvivalRule, n_samples: usize, seed: u64) -> Result<BasinScan> {
    rule.validate()?;
    require(n_samples >= 1, "n_samples", n_samples as f64, "must be positive")?;
    let x_star = positive_equilibrium(p).ok_or_else(|| crate::stability::no_equilibrium(p))?;
    let domain_max = rule.domain_max_for(p);
    let k = p.delay();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = (0..n_samples)
        .map(|_| {
            let history: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * domain_max).collect();
            let n0_plus = rng.random::<f64>() * domain_max;
            InitialData::new(n0_plus, history)
        })
        .collect::<Result<Vec<_>>>()?;

    let samples = starts
        .par_iter()
        .map(|init| classify_start(p, x_star, init, rule))
        .collect::<Result<Vec<_>>>()?;

    let count = |o: BasinOutcome| samples.iter().filter(|s| s.outcome == o).count();
    let metadata = BasinMetadata {
        seed,
        rng: RNG_FAMILY.to_string(),
        params: *p,
        rule: *rule,
        domain_max,
        x_star,
        n_samples,
        extended_sampling: k != 1,
        survived: count(BasinOutcome::Survived),
        extinct: count(BasinOutcome::Extinct),
        indeterminate: count(BasinOutcome::Indeterminate),
    };
    Ok(BasinScan { samples, metadata })
}

/// How the effort is chosen for each sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffortRule {
    /// `E = 1 - e^{-rT/2}` at every cell.
    Optimal,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    #[serde(rename = "rT")]
    pub rt: f64,
    #[serde(rename = "E")]
    pub effort: f64,
    pub verdict: StabilityClass,
    pub margin: f64,
}

/// `start, start + step, ...` up to `stop` (inclusive, with slack for rounding).
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    require(step > 0.0 && step.is_finite(), "step", step, "must be positive")?;
    require(stop >= start, "stop", stop, "must not be below start")?;
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// One analytic verdict per `(k, rT)` cell, `k`-major.
///
/// Cells use `T = 1`, `r = rT`; the carrying capacity does not affect stability.
pub fn stability_region_sweep(k_list: &[usize], rt_grid: &[f64], effort_rule: EffortRule) -> Result<Vec<SweepRow>> {
    require(!k_list.is_empty(), "k_list", 0.0, "must not be empty")?;
    require(!rt_grid.is_empty(), "rt_grid", 0.0, "must not be empty")?;
    let cells: Vec<(usize, f64)> = k_list
        .iter()
        .flat_map(|&k| rt_grid.iter().map(move |&rt| (k, rt)))
        .collect();
    cells
        .par_iter()
        .map(|&(k, rt)| {
            let effort = match effort_rule {
                EffortRule::Optimal => optimal_effort(rt, 1.0),
                EffortRule::Fixed(e) => e,
            };
            let p = ModelParams::new(rt, 1.0, 1.0, effort, k)?;
            let v = classify(&p, DEFAULT_BOUNDARY_TOL);
            Ok(SweepRow {
                k,
                rt,
                effort,
                verdict: v.class,
                margin: v.margin,
            })
        })
        .collect()
}

/// Adjacent rows (same `k`) where the verdict switches between Stable and not.
pub fn transitions(rows: &[SweepRow]) -> Vec<(SweepRow, SweepRow)> {
    rows.windows(2)
        .filter(|w| w[0].k == w[1].k)
        .filter(|w| (w[0].verdict == StabilityClass::Stable) != (w[1].verdict == StabilityClass::Stable))
        .map(|w| (w[0], w[1]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub k: usize,
    pub f_k: f64,
    pub k_f_k: f64,
}

/// `(k, f(k), k f(k))` for `k = 2..=k_max`.
pub fn msy_bound_table(k_max: usize) -> Result<Vec<BoundRow>> {
    require(k_max >= 2, "k_max", k_max as f64, "must be at least 2")?;
    Ok((2..=k_max)
        .map(|k| {
            let f_k = msy_rt_bound(k);
            BoundRow {
                k,
                f_k,
                k_f_k: k as f64 * f_k,
            }
        })
        .collect())
}
