//! Run configuration: a JSON document whose fields are all optional.
//!
//! Values are merged field by field with precedence flags > file > defaults,
//! and the fully resolved config is echoed into the metadata sidecar.

use std::path::{Path, PathBuf};

use harvest_core::stability::DEFAULT_BOUNDARY_TOL;
use harvest_core::yields::DEFAULT_FRONTIER_TOL;
use harvest_core::{grid, optimal_effort, EffortRule, InitialData, ModelParams, StoppingRule, SurvivalRule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 20;
pub const DEFAULT_K_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffortKeyword {
    Optimal,
}

/// Either a number in `(0, 1)` or the keyword `"optimal"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EffortSpec {
    Value(f64),
    Keyword(EffortKeyword),
}

impl std::str::FromStr for EffortSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("optimal") {
            return Ok(EffortSpec::Keyword(EffortKeyword::Optimal));
        }
        s.parse::<f64>()
            .map(EffortSpec::Value)
            .map_err(|_| format!("expected a number or `optimal`, got `{s}`"))
    }
}

impl EffortSpec {
    fn rule(self) -> EffortRule {
        match self {
            EffortSpec::Value(e) => EffortRule::Fixed(e),
            EffortSpec::Keyword(EffortKeyword::Optimal) => EffortRule::Optimal,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "K_c", skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub effort: Option<EffortSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consecutive_hits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_periods: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extinction_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurvivalConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_halfwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extinction_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rt_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rt_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rt_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effort: Option<EffortSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitialData>,
    pub stopping: StoppingConfig,
    pub survival: SurvivalConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Bisection tolerance for the sustainability frontier.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Half-width of the Marginal band in stability verdicts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_tol: Option<f64>,
}

macro_rules! overlay {
    ($base:expr, $top:expr; $($field:ident),+ $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )+
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &RunConfig) -> Self {
        overlay!(self.params, top.params; r, capacity, period, effort, k);
        overlay!(self.stopping, top.stopping; rel_tol, consecutive_hits, max_periods, extinction_threshold);
        overlay!(self.survival, top.survival; iterations, window_halfwidth, extinction_threshold, domain_max);
        overlay!(self.sweep, top.sweep; k_list, rt_start, rt_stop, rt_step, effort);
        overlay!(self.output, top.output; path, format);
        overlay!(self, top; init, seed, samples, samples_per_period, k_max, tolerance, boundary_tol);
        self
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let p = &self.params;
        let r = p.r.ok_or_else(|| missing("params.r (--r)"))?;
        let capacity = p.capacity.ok_or_else(|| missing("params.K_c (--kc)"))?;
        let period = p.period.unwrap_or(1.0);
        let k = p.k.ok_or_else(|| missing("params.k (--delay)"))?;
        let effort = match p.effort.ok_or_else(|| missing("params.E (--effort)"))? {
            EffortSpec::Value(e) => e,
            EffortSpec::Keyword(EffortKeyword::Optimal) => optimal_effort(r, period),
        };
        Ok(ModelParams::new(r, capacity, period, effort, k)?)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        self.init
            .clone()
            .ok_or_else(|| missing("init (--n0-plus and --history)"))
    }

    pub fn stopping_rule(&self) -> Result<StoppingRule> {
        let d = StoppingRule::default();
        let s = &self.stopping;
        let rule = StoppingRule {
            rel_tol: s.rel_tol.unwrap_or(d.rel_tol),
            consecutive_hits: s.consecutive_hits.unwrap_or(d.consecutive_hits),
            max_periods: s.max_periods.unwrap_or(d.max_periods),
            extinction_threshold: s.extinction_threshold.unwrap_or(d.extinction_threshold),
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn survival_rule(&self) -> Result<SurvivalRule> {
        let d = SurvivalRule::default();
        let s = &self.survival;
        let rule = SurvivalRule {
            iterations: s.iterations.unwrap_or(d.iterations),
            window_halfwidth: s.window_halfwidth.unwrap_or(d.window_halfwidth),
            extinction_threshold: s.extinction_threshold.unwrap_or(d.extinction_threshold),
            domain_max: s.domain_max.or(d.domain_max),
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn samples_per_period(&self) -> usize {
        self.samples_per_period.unwrap_or(DEFAULT_SAMPLES_PER_PERIOD)
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(DEFAULT_K_MAX)
    }

    pub fn frontier_tol(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_FRONTIER_TOL)
    }

    pub fn boundary_tol(&self) -> Result<f64> {
        let tol = self.boundary_tol.unwrap_or(DEFAULT_BOUNDARY_TOL);
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!(
                "boundary_tol must be non-negative, got {tol}"
            )));
        }
        Ok(tol)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.output.format.unwrap_or(default)
    }

    pub fn sweep_k_list(&self) -> Vec<usize> {
        self.sweep.k_list.clone().unwrap_or_else(|| (1..=5).collect())
    }

    pub fn sweep_rt_grid(&self) -> Result<Vec<f64>> {
        let s = &self.sweep;
        Ok(grid(
            s.rt_start.unwrap_or(0.1),
            s.rt_stop.unwrap_or(3.0),
            s.rt_step.unwrap_or(0.01),
        )?)
    }

    /// The sweep's effort, falling back to `params.E` and then to `E_opt`.
    pub fn sweep_effort(&self) -> EffortRule {
        self.sweep
            .effort
            .or(self.params.effort)
            .map(EffortSpec::rule)
            .unwrap_or(EffortRule::Optimal)
    }
}

fn missing(what: &str) -> CliError {
    CliError::Config(format!("missing {what}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_document() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"params": {"r": 1.0, "K_c": 500, "E": "optimal", "k": 2},
                "init": {"n0_plus": 100, "history": [140, 120]},
                "stopping": {"max_periods": 50}}"#,
        )
        .unwrap();
        let p = cfg.model_params().unwrap();
        assert_eq!(p.period(), 1.0);
        assert!((p.effort() - optimal_effort(1.0, 1.0)).abs() < 1e-15);
        assert_eq!(cfg.stopping_rule().unwrap().max_periods, 50);
        assert_eq!(cfg.stopping_rule().unwrap().rel_tol, 1e-4);
        assert_eq!(cfg.initial_data().unwrap().history(), &[140.0, 120.0]);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"parms": {}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"params": {"K": 1}}"#).is_err());
    }

    #[test]
    fn overlay_prefers_top_layer() {
        let file: RunConfig =
            serde_json::from_str(r#"{"params": {"r": 1.0, "K_c": 500, "E": 0.3, "k": 1}, "seed": 4}"#).unwrap();
        let flags = RunConfig {
            params: ParamsConfig {
                r: Some(2.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let merged = file.overlay(&flags);
        assert_eq!(merged.params.r, Some(2.0));
        assert_eq!(merged.params.capacity, Some(500.0));
        assert_eq!(merged.seed(), 4);
    }

    #[test]
    fn missing_fields_are_config_errors() {
        let err = RunConfig::default().model_params().unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
        assert!(RunConfig::default().initial_data().is_err());
    }

    #[test]
    fn effort_spec_from_str() {
        assert_eq!(
            "optimal".parse::<EffortSpec>().unwrap(),
            EffortSpec::Keyword(EffortKeyword::Optimal)
        );
        assert_eq!("0.25".parse::<EffortSpec>().unwrap(), EffortSpec::Value(0.25));
        assert!("lots".parse::<EffortSpec>().is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = serde_json::from_str::<RunConfig>(
            r#"{"params": {"r": 1.3747, "K_c": 307.1609, "T": 1, "E": 0.4971, "k": 1},
                "survival": {"iterations": 100}, "sweep": {"effort": {"fixed": 0.2}}, "seed": 9}"#,
        );
        // `fixed` is not part of the effort spelling; only numbers and "optimal" are.
        assert!(cfg.is_err());
        let cfg: RunConfig = serde_json::from_str(
            r#"{"params": {"r": 1.3747, "K_c": 307.1609, "T": 1, "E": 0.4971, "k": 1},
                "survival": {"iterations": 100}, "sweep": {"effort": "optimal"}, "seed": 9}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
